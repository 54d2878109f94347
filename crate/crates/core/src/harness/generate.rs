//! Synthetic clustered datasets labeled by tools of known accuracy.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{ClusterId, Dataset, Document, DocumentId, Label, Polarity, ToolId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("accuracy {0} is outside [0, 1]")]
    Accuracy(f64),
    #[error("polarity prior must be three non-negative numbers summing to 1")]
    Prior,
    #[error("cluster size must be at least 1 and MIN <= MAX")]
    ClusterSize,
    #[error("invalid cluster size '{0}' (expected K or MIN-MAX)")]
    ParseClusterSize(String),
}

/// Members per cluster: fixed, or drawn uniformly from an inclusive range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSize {
    Fixed(usize),
    Range(usize, usize),
}

impl fmt::Display for ClusterSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterSize::Fixed(k) => write!(f, "{k}"),
            ClusterSize::Range(a, b) => write!(f, "{a}-{b}"),
        }
    }
}

impl FromStr for ClusterSize {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GenError::ParseClusterSize(s.to_string());
        let size = match s.split_once('-') {
            Some((a, b)) => ClusterSize::Range(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => ClusterSize::Fixed(s.trim().parse().map_err(|_| bad())?),
        };
        Ok(size)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n_clusters: usize,
    pub cluster_size: ClusterSize,
    /// Tool names with their probability of emitting the gold label.
    pub tools: Vec<(ToolId, f64)>,
    /// Gold prior over (positive, negative, neutral).
    pub polarity_prior: [f64; 3],
    pub seed: u64,
}

impl GenSpec {
    /// Tools named `t0, t1, …` with the given accuracies and a uniform prior.
    pub fn new(n_clusters: usize, cluster_size: ClusterSize, accuracies: &[f64], seed: u64) -> Self {
        GenSpec {
            n_clusters,
            cluster_size,
            tools: accuracies
                .iter()
                .enumerate()
                .map(|(i, &a)| (ToolId::new(format!("t{i}")).expect("non-empty"), a))
                .collect(),
            polarity_prior: [1.0 / 3.0; 3],
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if let Some(&(_, a)) = self.tools.iter().find(|(_, a)| !(0.0..=1.0).contains(a)) {
            return Err(GenError::Accuracy(a));
        }
        let p = self.polarity_prior;
        if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(GenError::Prior);
        }
        match self.cluster_size {
            ClusterSize::Fixed(0) => Err(GenError::ClusterSize),
            ClusterSize::Range(a, b) if a == 0 || a > b => Err(GenError::ClusterSize),
            _ => Ok(()),
        }
    }
}

/// Draws a dataset with gold labels. Clusters are `c0, c1, …` and documents
/// `d0, d1, …` numbered across clusters.
pub fn generate(spec: &GenSpec) -> Result<Dataset, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let prior = WeightedIndex::new(spec.polarity_prior).map_err(|_| GenError::Prior)?;
    let tools: Vec<ToolId> = spec.tools.iter().map(|(t, _)| t.clone()).collect();
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for c in 0..spec.n_clusters {
        let cluster = ClusterId::new(format!("c{c}")).expect("non-empty");
        let gold = Polarity::ALL[prior.sample(&mut rng)];
        let size = match spec.cluster_size {
            ClusterSize::Fixed(k) => k,
            ClusterSize::Range(a, b) => rng.gen_range(a..=b),
        };
        for _ in 0..size {
            let id = DocumentId::new(format!("d{}", docs.len())).expect("non-empty");
            for (tool, acc) in &spec.tools {
                let p = if rng.gen_bool(*acc) {
                    gold
                } else {
                    gold.others()[rng.gen_range(0..2)]
                };
                labels.push(Label::new(id.clone(), tool.clone(), p));
            }
            docs.push(Document::with_gold(id, cluster.clone(), Some(gold)));
        }
    }
    Ok(Dataset::with_tools(docs, tools, labels).expect("generated identifiers are unique"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_tools_are_consistent() {
        let ds = generate(&GenSpec::new(5, ClusterSize::Fixed(3), &[1.0, 1.0], 1)).unwrap();
        for docs in ds.group_by_cluster().values() {
            let first = ds.label(&docs[0], &ds.tools()[0]).unwrap();
            for d in docs {
                assert!(ds.labels_of(d).all(|l| l.polarity == first));
            }
        }
    }

    #[test]
    fn shape_and_determinism() {
        let spec = GenSpec::new(3, ClusterSize::Fixed(3), &[0.5], 9);
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.documents().len(), 9);
        assert_eq!(ds.group_by_cluster().len(), 3);
        assert_eq!(ds.tools()[0].as_str(), "t0");
        assert_eq!(generate(&spec).unwrap(), ds);

        let ranged = generate(&GenSpec::new(50, ClusterSize::Range(2, 4), &[0.5], 9)).unwrap();
        assert!(ranged.group_by_cluster().values().all(|d| (2..=4).contains(&d.len())));
    }

    #[test]
    fn validation() {
        assert_eq!(
            generate(&GenSpec::new(1, ClusterSize::Fixed(1), &[1.2], 0)).unwrap_err(),
            GenError::Accuracy(1.2)
        );
        assert_eq!(
            generate(&GenSpec::new(1, ClusterSize::Fixed(0), &[1.0], 0)).unwrap_err(),
            GenError::ClusterSize
        );
        let mut spec = GenSpec::new(1, ClusterSize::Fixed(1), &[1.0], 0);
        spec.polarity_prior = [0.5, 0.5, 0.5];
        assert_eq!(generate(&spec).unwrap_err(), GenError::Prior);
        assert_eq!("4".parse::<ClusterSize>().unwrap(), ClusterSize::Fixed(4));
        assert_eq!("2-5".parse::<ClusterSize>().unwrap(), ClusterSize::Range(2, 5));
        assert!("x".parse::<ClusterSize>().is_err());
    }
}
