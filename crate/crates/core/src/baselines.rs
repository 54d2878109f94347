//! Majority-voting baselines: inside one tool's cluster labels, across tools
//! per document, and pooled across both.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{ClusterId, Dataset, DocumentId, Polarity, PolarityOrder, ToolId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("unknown tool '{0}'")]
    UnknownTool(ToolId),
    #[error("document '{0}' has no labels")]
    UnlabeledDocument(DocumentId),
    #[error("cluster '{0}' has no labels")]
    UnlabeledCluster(ClusterId),
    #[error("in-tool voting needs a tool")]
    MissingTool,
    #[error("unknown baseline kind '{0}' (expected in-tool, inter-tool or both)")]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    InTool,
    InterTool,
    Both,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [BaselineKind::InTool, BaselineKind::InterTool, BaselineKind::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::InTool => "in-tool",
            BaselineKind::InterTool => "inter-tool",
            BaselineKind::Both => "both",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| BaselineError::UnknownKind(s.to_string()))
    }
}

pub type Predictions = IndexMap<DocumentId, Polarity>;

/// Per cluster, the most frequent label `tool` gave inside the cluster,
/// assigned to every member. Clusters the tool never labeled are omitted.
pub fn mv_in_tool(ds: &Dataset, tool: &ToolId, order: &PolarityOrder) -> Result<Predictions, BaselineError> {
    if !ds.tools().contains(tool) {
        return Err(BaselineError::UnknownTool(tool.clone()));
    }
    let mut out = Predictions::new();
    for docs in ds.group_by_cluster().values() {
        let mut counts = [0usize; 3];
        for d in docs {
            if let Some(p) = ds.label(d, tool) {
                counts[p.index()] += 1;
            }
        }
        if counts.iter().sum::<usize>() == 0 {
            continue;
        }
        let winner = order.argmax_counts(counts);
        out.extend(docs.iter().map(|d| (d.clone(), winner)));
    }
    Ok(out)
}

/// Per document, the polarity most tools agree on.
pub fn mv_inter_tool(ds: &Dataset, order: &PolarityOrder) -> Result<Predictions, BaselineError> {
    ds.documents()
        .iter()
        .map(|doc| {
            let mut counts = [0usize; 3];
            for l in ds.labels_of(&doc.id) {
                counts[l.polarity.index()] += 1;
            }
            if counts.iter().sum::<usize>() == 0 {
                return Err(BaselineError::UnlabeledDocument(doc.id.clone()));
            }
            Ok((doc.id.clone(), order.argmax_counts(counts)))
        })
        .collect()
}

/// Per cluster, the most frequent label among all tools and members.
pub fn mv_both(ds: &Dataset, order: &PolarityOrder) -> Result<Predictions, BaselineError> {
    let clusters = ds.group_by_cluster();
    let mut winners: IndexMap<&ClusterId, Polarity> = IndexMap::new();
    for (cluster, docs) in &clusters {
        let mut counts = [0usize; 3];
        for d in docs {
            for l in ds.labels_of(d) {
                counts[l.polarity.index()] += 1;
            }
        }
        if counts.iter().sum::<usize>() == 0 {
            return Err(BaselineError::UnlabeledCluster(cluster.clone()));
        }
        winners.insert(cluster, order.argmax_counts(counts));
    }
    Ok(ds.documents().iter().map(|d| (d.id.clone(), winners[&d.cluster])).collect())
}

/// Dispatches on `kind`; `tool` is required for in-tool voting.
pub fn run_baseline(ds: &Dataset, kind: BaselineKind, tool: Option<&ToolId>, order: &PolarityOrder) -> Result<Predictions, BaselineError> {
    match kind {
        BaselineKind::InTool => mv_in_tool(ds, tool.ok_or(BaselineError::MissingTool)?, order),
        BaselineKind::InterTool => mv_inter_tool(ds, order),
        BaselineKind::Both => mv_both(ds, order),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Document, Label};

    fn ds(docs: &[(&str, &str)], labels: &[(&str, &str, Polarity)]) -> Dataset {
        let docs = docs
            .iter()
            .map(|(d, c)| Document::new(DocumentId::new(*d).unwrap(), ClusterId::new(*c).unwrap()))
            .collect();
        let labels = labels
            .iter()
            .map(|(d, t, p)| Label::new(DocumentId::new(*d).unwrap(), ToolId::new(*t).unwrap(), *p))
            .collect();
        Dataset::new(docs, labels).unwrap()
    }

    fn d(s: &str) -> DocumentId {
        DocumentId::new(s).unwrap()
    }

    #[test]
    fn in_tool_tie_prefers_negative() {
        use Polarity::*;
        let data = ds(
            &[("a", "c"), ("b", "c"), ("e", "c"), ("f", "c")],
            &[("a", "t", Neutral), ("b", "t", Negative), ("e", "t", Negative), ("f", "t", Neutral)],
        );
        let p = mv_in_tool(&data, &ToolId::new("t").unwrap(), &PolarityOrder::default()).unwrap();
        assert!(p.values().all(|&x| x == Negative));
        let err = mv_in_tool(&data, &ToolId::new("zz").unwrap(), &PolarityOrder::default()).unwrap_err();
        assert!(matches!(err, BaselineError::UnknownTool(_)));
    }

    #[test]
    fn singleton_keeps_label() {
        let data = ds(&[("a", "c")], &[("a", "t", Polarity::Neutral)]);
        let order = PolarityOrder::default();
        let tool = ToolId::new("t").unwrap();
        assert_eq!(mv_in_tool(&data, &tool, &order).unwrap()[&d("a")], Polarity::Neutral);
        assert_eq!(mv_inter_tool(&data, &order).unwrap()[&d("a")], Polarity::Neutral);
        assert_eq!(mv_both(&data, &order).unwrap()[&d("a")], Polarity::Neutral);
    }

    #[test]
    fn unlabeled_inputs_error() {
        let data = ds(&[("a", "c"), ("b", "k")], &[("a", "t", Polarity::Neutral)]);
        let order = PolarityOrder::default();
        assert_eq!(mv_inter_tool(&data, &order).unwrap_err(), BaselineError::UnlabeledDocument(d("b")));
        assert!(matches!(mv_both(&data, &order), Err(BaselineError::UnlabeledCluster(_))));
        // the tool abstains on b's cluster: nothing predicted there
        let p = mv_in_tool(&data, &ToolId::new("t").unwrap(), &order).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn kind_round_trip() {
        for k in BaselineKind::ALL {
            assert_eq!(k.as_str().parse::<BaselineKind>().unwrap(), k);
        }
        assert!("neither".parse::<BaselineKind>().is_err());
    }
}
