//! Run reports and their JSON and text renderings.

use std::fmt::Write;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::baselines::{mv_both, mv_in_tool, mv_inter_tool, BaselineKind, Predictions};
use crate::kb::{ClusterId, Dataset, DocumentId, GoldAccess, Polarity, ToolId};
use crate::mln::WeightVector;
use crate::resolve::{Resolution, Source, Timings};
use crate::saturation::{derive_inconsistencies, instantiate, measure_inconsistency, saturate, InconsistencyReport};

use super::config::RunConfig;
use super::evaluate::{evaluate, has_full_gold, tool_accuracy};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
}

impl From<[f64; 3]> for MarginalRow {
    fn from(r: [f64; 3]) -> Self {
        MarginalRow {
            positive: r[0],
            negative: r[1],
            neutral: r[2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocReport {
    pub id: DocumentId,
    pub cluster: ClusterId,
    pub gold: Option<Polarity>,
    pub step1: Option<Polarity>,
    #[serde(rename = "final")]
    pub final_polarity: Option<Polarity>,
    pub confidence: Option<f64>,
    pub source: Option<Source>,
    pub marginals: Option<MarginalRow>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InconsistencySummary {
    pub before: InconsistencyReport,
    pub after: Option<InconsistencyReport>,
}

/// Accuracies against gold; empty when some document lacks gold.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub pipeline: Option<f64>,
    pub step1: Option<f64>,
    pub predictions: Option<f64>,
    pub tools: IndexMap<ToolId, f64>,
    pub baselines: IndexMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub summary: DatasetSummary,
    pub documents: Vec<DocReport>,
    pub weights: Option<WeightVector>,
    pub inconsistency: InconsistencySummary,
    pub accuracy: AccuracyReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<Timings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub documents: usize,
    pub clusters: usize,
    pub tools: Vec<ToolId>,
    pub labels: usize,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.summary;
        writeln!(
            out,
            "{}: {} documents, {} clusters, {} tools, {} labels",
            self.command,
            s.documents,
            s.clusters,
            s.tools.len(),
            s.labels
        )
        .unwrap();
        let inc = &self.inconsistency;
        write!(
            out,
            "inconsistency before: in-tool {}, inter-tool {}, conflicted atoms {}",
            inc.before.in_tool_violations, inc.before.inter_tool_violations, inc.before.conflicted_atoms
        )
        .unwrap();
        if let Some(a) = &inc.after {
            write!(
                out,
                "; after: in-tool {}, inter-tool {}, conflicted atoms {}",
                a.in_tool_violations, a.inter_tool_violations, a.conflicted_atoms
            )
            .unwrap();
        }
        out.push('\n');
        let acc = &self.accuracy;
        for (name, v) in [("pipeline", acc.pipeline), ("step 1", acc.step1), ("predictions", acc.predictions)] {
            if let Some(v) = v {
                writeln!(out, "accuracy {name}: {v:.4}").unwrap();
            }
        }
        for (t, v) in &acc.tools {
            writeln!(out, "accuracy tool {t}: {v:.4}").unwrap();
        }
        for (b, v) in &acc.baselines {
            writeln!(out, "accuracy baseline {b}: {v:.4}").unwrap();
        }
        if let Some(w) = &self.weights {
            out.push_str("weights:\n");
            for (name, v) in w.iter() {
                writeln!(out, "  {name} {v:.4}").unwrap();
            }
        }
        if let Some(t) = &self.timings {
            writeln!(
                out,
                "timing ms: ground {:.1}, learn {:.1}, infer {:.1}",
                t.ground_ms, t.learn_ms, t.infer_ms
            )
            .unwrap();
        }
        out.push_str("doc cluster gold step1 final confidence\n");
        let show = |p: Option<Polarity>| p.map(|p| p.code()).unwrap_or("-");
        for d in &self.documents {
            let conf = d.confidence.map(|c| format!("{c:.4}")).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{} {} {} {} {} {}",
                d.id,
                d.cluster,
                show(d.gold),
                show(d.step1),
                show(d.final_polarity),
                conf
            )
            .unwrap();
        }
        out
    }
}

fn summary(ds: &Dataset) -> DatasetSummary {
    DatasetSummary {
        documents: ds.documents().len(),
        clusters: ds.group_by_cluster().len(),
        tools: ds.tools().iter().cloned().collect(),
        labels: ds.labels().len(),
    }
}

fn before(ds: &Dataset) -> InconsistencyReport {
    measure_inconsistency(ds, &derive_inconsistencies(&saturate(&instantiate(ds))))
}

/// Tool and baseline accuracies; baselines that cannot run on `ds` are
/// left out.
fn reference_accuracy(ds: &Dataset, cfg: &RunConfig) -> AccuracyReport {
    let mut acc = AccuracyReport::default();
    if !has_full_gold(ds) {
        return acc;
    }
    for t in ds.tools() {
        if let Ok(a) = tool_accuracy(ds, t) {
            acc.tools.insert(t.clone(), a);
        }
    }
    let order = &cfg.tie_break;
    let mut runs: Vec<(String, Option<Predictions>)> = vec![
        (BaselineKind::InterTool.to_string(), mv_inter_tool(ds, order).ok()),
        (BaselineKind::Both.to_string(), mv_both(ds, order).ok()),
    ];
    for t in ds.tools() {
        runs.push((format!("{}:{t}", BaselineKind::InTool), mv_in_tool(ds, t, order).ok()));
    }
    for (name, preds) in runs {
        if let Some(a) = preds.and_then(|p| evaluate(ds, &p).ok()) {
            acc.baselines.insert(name, a);
        }
    }
    acc
}

fn doc_rows(ds: &Dataset, fill: impl Fn(&DocumentId, &mut DocReport)) -> Vec<DocReport> {
    let access = GoldAccess::grant();
    ds.documents()
        .iter()
        .map(|d| {
            let mut row = DocReport {
                id: d.id.clone(),
                cluster: d.cluster.clone(),
                gold: d.gold(&access),
                step1: None,
                final_polarity: None,
                confidence: None,
                source: None,
                marginals: None,
            };
            fill(&d.id, &mut row);
            row
        })
        .collect()
}

pub fn resolve_report(ds: &Dataset, res: &Resolution, cfg: &RunConfig, with_timing: bool) -> RunReport {
    let documents = doc_rows(ds, |id, row| {
        row.step1 = res.step1.get(id).copied();
        if let Some(r) = res.per_doc.get(id) {
            row.final_polarity = Some(r.polarity);
            row.confidence = Some(r.confidence);
            row.source = Some(r.source);
        }
        row.marginals = res.marginals.row(id).map(MarginalRow::from);
    });
    let mut accuracy = reference_accuracy(ds, cfg);
    if has_full_gold(ds) {
        accuracy.pipeline = evaluate(ds, &res.predictions()).ok();
        accuracy.step1 = evaluate(ds, &res.step1).ok();
    }
    RunReport {
        command: "resolve".into(),
        config: cfg.clone(),
        summary: summary(ds),
        documents,
        weights: Some(res.weights.clone()),
        inconsistency: InconsistencySummary {
            before: res.before,
            after: Some(res.after),
        },
        accuracy,
        timings: with_timing.then_some(res.timings),
    }
}

pub fn baseline_report(ds: &Dataset, preds: &Predictions, cfg: &RunConfig) -> RunReport {
    let documents = doc_rows(ds, |id, row| row.final_polarity = preds.get(id).copied());
    let mut accuracy = reference_accuracy(ds, cfg);
    if has_full_gold(ds) {
        accuracy.predictions = evaluate(ds, preds).ok();
    }
    RunReport {
        command: "baseline".into(),
        config: cfg.clone(),
        summary: summary(ds),
        documents,
        weights: None,
        inconsistency: InconsistencySummary {
            before: before(ds),
            after: None,
        },
        accuracy,
        timings: None,
    }
}

/// Accuracy of an external prediction file, or just the reference
/// accuracies when there is none.
pub fn evaluation_report(
    ds: &Dataset,
    preds: Option<&IndexMap<DocumentId, Polarity>>,
    accuracy: Option<f64>,
    cfg: &RunConfig,
) -> RunReport {
    let documents = doc_rows(ds, |id, row| row.final_polarity = preds.and_then(|p| p.get(id).copied()));
    let mut acc = reference_accuracy(ds, cfg);
    acc.predictions = accuracy;
    RunReport {
        command: "eval".into(),
        config: cfg.clone(),
        summary: summary(ds),
        documents,
        weights: None,
        inconsistency: InconsistencySummary {
            before: before(ds),
            after: None,
        },
        accuracy: acc,
        timings: None,
    }
}
