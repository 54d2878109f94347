//! The end-to-end pipeline: fact base, learning, marginal inference, then a
//! probability-weighted vote inside each cluster.

use std::time::Instant;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{ClusterId, Dataset, Document, DocumentId, Label, Polarity, PolarityOrder, ToolId};
use crate::mln::{
    ground, infer_marginals, learn_weights, Expectations, LearnOptions, Marginals, MlnError, SamplerConfig, TrainingAssignment,
    WeightVector, DEFAULT_ORACLE_CAP, MAX_ORACLE_CAP,
};
use crate::rules::RuleSet;
use crate::saturation::{derive_inconsistencies, instantiate, measure_inconsistency, saturate, InconsistencyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error(transparent)]
    Mln(#[from] MlnError),
    #[error("cannot vote in an empty cluster")]
    EmptyCluster,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolveConfig {
    /// Inference sampler; its seed drives every random choice.
    pub sampler: SamplerConfig,
    pub learn_iters: usize,
    /// Samples per expectation estimate during learning, when sampling.
    pub learn_samples: usize,
    pub damping: f64,
    pub max_step: f64,
    pub tie_break: PolarityOrder,
    /// Components with at most this many query atoms are handled exactly.
    pub oracle_cap: usize,
    pub step2: bool,
}

impl Default for ResolveConfig {
    fn default() -> Self {
        ResolveConfig {
            sampler: SamplerConfig::default(),
            learn_iters: 10,
            learn_samples: 300,
            damping: 1e-4,
            max_step: 1.0,
            tie_break: PolarityOrder::default(),
            oracle_cap: DEFAULT_ORACLE_CAP,
            step2: true,
        }
    }
}

impl ResolveConfig {
    pub fn validate(&self) -> Result<(), ResolveError> {
        self.sampler.validate()?;
        if self.learn_samples == 0 {
            return Err(ResolveError::InvalidConfig("learn_samples must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return Err(ResolveError::InvalidConfig("damping must be positive".into()));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(ResolveError::InvalidConfig("max_step must be positive".into()));
        }
        if self.oracle_cap > MAX_ORACLE_CAP {
            return Err(ResolveError::InvalidConfig(format!("oracle_cap must be at most {MAX_ORACLE_CAP}")));
        }
        Ok(())
    }

    fn learn_options(&self) -> LearnOptions {
        LearnOptions {
            iterations: self.learn_iters,
            damping: self.damping,
            max_step: self.max_step,
            expectations: Expectations::Auto {
                cap: self.oracle_cap,
                sampler: SamplerConfig {
                    num_samples: self.learn_samples,
                    ..self.sampler.clone()
                },
            },
        }
    }
}

/// Wall-clock milliseconds per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub ground_ms: f64,
    pub learn_ms: f64,
    pub infer_ms: f64,
}

/// Output of the first phase.
#[derive(Clone, Debug, PartialEq)]
pub struct Step1 {
    pub marginals: Marginals,
    pub weights: WeightVector,
    pub argmax: IndexMap<DocumentId, Polarity>,
    pub timings: Timings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Fact base, grounding, weight learning and marginal inference; each
/// document takes its most probable polarity.
pub fn step1_infer(ds: &Dataset, rules: &RuleSet, cfg: &ResolveConfig) -> Result<Step1, ResolveError> {
    cfg.validate()?;
    let mut timings = Timings::default();

    let t = Instant::now();
    let prior = instantiate(ds);
    let derived = derive_inconsistencies(&saturate(&prior));
    let net = ground(rules, &prior, ds)?;
    let training = TrainingAssignment::from_fact_set(&net, &derived);
    timings.ground_ms = ms(t);

    let t = Instant::now();
    let weights = learn_weights(&net, &training, &net.initial_weights(), &cfg.learn_options())?;
    timings.learn_ms = ms(t);

    let t = Instant::now();
    let marginals = infer_marginals(&net, &weights, cfg.oracle_cap, &cfg.sampler)?;
    timings.infer_ms = ms(t);

    let argmax = marginals.argmax(&cfg.tie_break);
    Ok(Step1 {
        marginals,
        weights,
        argmax,
        timings,
    })
}

/// Polarity with the largest summed marginal over the cluster, and that
/// sum.
pub fn step2_weighted_vote(cluster: &[(DocumentId, [f64; 3])], order: &PolarityOrder) -> Result<(Polarity, f64), ResolveError> {
    if cluster.is_empty() {
        return Err(ResolveError::EmptyCluster);
    }
    let mut mass = [0.0; 3];
    for (_, row) in cluster {
        for k in 0..3 {
            mass[k] += row[k];
        }
    }
    let winner = order.argmax(mass);
    Ok((winner, mass[winner.index()]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// The document's own most probable polarity.
    Step1,
    /// The cluster vote overrode the document's own argmax.
    Step2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocResolution {
    pub polarity: Polarity,
    pub confidence: f64,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub per_doc: IndexMap<DocumentId, DocResolution>,
    pub step1: IndexMap<DocumentId, Polarity>,
    pub weights: WeightVector,
    pub marginals: Marginals,
    /// Over the input labels.
    pub before: InconsistencyReport,
    /// Over the final labels, read as the output of a single tool.
    pub after: InconsistencyReport,
    pub timings: Timings,
}

impl Resolution {
    pub fn predictions(&self) -> IndexMap<DocumentId, Polarity> {
        self.per_doc.iter().map(|(d, r)| (d.clone(), r.polarity)).collect()
    }
}

const RESOLVED_TOOL: &str = "resolved";

fn report_for(ds: &Dataset, labels: &IndexMap<DocumentId, Polarity>) -> InconsistencyReport {
    let tool = ToolId::new(RESOLVED_TOOL).expect("non-empty");
    let docs: Vec<Document> = ds
        .documents()
        .iter()
        .map(|d| Document::new(d.id.clone(), d.cluster.clone()))
        .collect();
    let labels = labels.iter().map(|(d, p)| Label::new(d.clone(), tool.clone(), *p)).collect();
    let pseudo = Dataset::with_tools(docs, vec![tool], labels).expect("documents come from a valid dataset");
    let fs = derive_inconsistencies(&saturate(&instantiate(&pseudo)));
    measure_inconsistency(&pseudo, &fs)
}

/// Runs both phases; with `cfg.step2` off, the step-1 argmax is final.
pub fn resolve(ds: &Dataset, rules: &RuleSet, cfg: &ResolveConfig) -> Result<Resolution, ResolveError> {
    let before = measure_inconsistency(ds, &derive_inconsistencies(&saturate(&instantiate(ds))));
    let s1 = step1_infer(ds, rules, cfg)?;

    let mut per_doc = IndexMap::new();
    if cfg.step2 {
        let clusters: IndexMap<ClusterId, Vec<DocumentId>> = ds.group_by_cluster();
        let mut votes: IndexMap<&ClusterId, (Polarity, f64)> = IndexMap::new();
        for (c, docs) in &clusters {
            let rows: Vec<(DocumentId, [f64; 3])> = docs
                .iter()
                .map(|d| (d.clone(), s1.marginals.row(d).expect("every document has marginals")))
                .collect();
            let (p, mass) = step2_weighted_vote(&rows, &cfg.tie_break)?;
            votes.insert(c, (p, (mass / docs.len() as f64).clamp(0.0, 1.0)));
        }
        for d in ds.documents() {
            let (p, conf) = votes[&d.cluster];
            let source = if s1.argmax[&d.id] == p { Source::Step1 } else { Source::Step2 };
            per_doc.insert(
                d.id.clone(),
                DocResolution {
                    polarity: p,
                    confidence: conf,
                    source,
                },
            );
        }
    } else {
        for (d, row) in s1.marginals.iter() {
            let p = s1.argmax[d];
            per_doc.insert(
                d.clone(),
                DocResolution {
                    polarity: p,
                    confidence: row[p.index()].clamp(0.0, 1.0),
                    source: Source::Step1,
                },
            );
        }
    }

    let finals: IndexMap<DocumentId, Polarity> = per_doc.iter().map(|(d, r)| (d.clone(), r.polarity)).collect();
    let after = report_for(ds, &finals);
    Ok(Resolution {
        per_doc,
        step1: s1.argmax,
        weights: s1.weights,
        marginals: s1.marginals,
        before,
        after,
        timings: s1.timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::generate_default_rules;

    fn id(s: &str) -> DocumentId {
        DocumentId::new(s).unwrap()
    }

    fn dataset(docs: &[(&str, &str)], labels: &[(&str, &str, Polarity)]) -> Dataset {
        let docs = docs
            .iter()
            .map(|(d, c)| Document::new(id(d), ClusterId::new(*c).unwrap()))
            .collect();
        let labels = labels
            .iter()
            .map(|(d, t, p)| Label::new(id(d), ToolId::new(*t).unwrap(), *p))
            .collect();
        Dataset::new(docs, labels).unwrap()
    }

    #[test]
    fn vote_sums_marginals() {
        let cluster = vec![
            (id("d6"), [0.6, 0.2, 0.2]),
            (id("d7"), [0.25, 0.55, 0.2]),
            (id("d8"), [0.7, 0.1, 0.2]),
            (id("d9"), [0.52, 0.28, 0.2]),
        ];
        let (p, mass) = step2_weighted_vote(&cluster, &PolarityOrder::default()).unwrap();
        assert_eq!(p, Polarity::Positive);
        assert!((mass - 2.07).abs() < 1e-12);
        assert_eq!(
            step2_weighted_vote(&[], &PolarityOrder::default()).unwrap_err(),
            ResolveError::EmptyCluster
        );
    }

    #[test]
    fn single_doc_unanimous_positive() {
        let ds = dataset(&[("d", "c")], &[("d", "a", Polarity::Positive), ("d", "b", Polarity::Positive)]);
        let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
        let s1 = step1_infer(&ds, &rules, &ResolveConfig::default()).unwrap();
        assert!(s1.marginals.get(&id("d"), Polarity::Positive).unwrap() > 0.5);
        assert_eq!(s1.argmax[&id("d")], Polarity::Positive);
    }

    #[test]
    fn no_labels_falls_back_to_tie_order() {
        let docs = vec![Document::new(id("d"), ClusterId::new("c").unwrap())];
        let tool = ToolId::new("t").unwrap();
        let ds = Dataset::with_tools(docs, vec![tool], vec![]).unwrap();
        let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
        let s1 = step1_infer(&ds, &rules, &ResolveConfig::default()).unwrap();
        for p in Polarity::ALL {
            assert!((s1.marginals.get(&id("d"), p).unwrap() - 1.0 / 3.0).abs() < 1e-9);
        }
        assert_eq!(s1.argmax[&id("d")], Polarity::Negative);
        let cfg = ResolveConfig {
            tie_break: "neu,pos,neg".parse().unwrap(),
            ..Default::default()
        };
        assert_eq!(step1_infer(&ds, &rules, &cfg).unwrap().argmax[&id("d")], Polarity::Neutral);
    }

    #[test]
    fn singleton_clusters_keep_step1() {
        let ds = dataset(
            &[("a", "1"), ("b", "2")],
            &[
                ("a", "t", Polarity::Positive),
                ("a", "u", Polarity::Positive),
                ("b", "t", Polarity::Neutral),
                ("b", "u", Polarity::Negative),
            ],
        );
        let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
        let r = resolve(&ds, &rules, &ResolveConfig::default()).unwrap();
        assert_eq!(r.predictions(), r.step1);
        assert!(r.per_doc.values().all(|d| d.source == Source::Step1));
    }

    #[test]
    fn cluster_shares_one_polarity() {
        let ds = dataset(
            &[("a", "c"), ("b", "c"), ("e", "c")],
            &[
                ("a", "t", Polarity::Positive),
                ("b", "t", Polarity::Negative),
                ("e", "t", Polarity::Positive),
            ],
        );
        let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
        let r = resolve(&ds, &rules, &ResolveConfig::default()).unwrap();
        let first = r.per_doc[0].polarity;
        assert!(r
            .per_doc
            .values()
            .all(|d| d.polarity == first && (0.0..=1.0).contains(&d.confidence)));
        assert_eq!(r.after.in_tool_violations, 0);
        assert_eq!(r.before.in_tool_violations, 2);
    }

    #[test]
    fn empty_dataset_resolves_to_nothing() {
        let ds = Dataset::default();
        let rules = generate_default_rules(&[ToolId::new("t").unwrap()].into_iter().collect(), 1.0).unwrap();
        let err = resolve(&ds, &rules, &ResolveConfig::default());
        // the default rules mention a tool the empty dataset lacks
        assert!(err.is_err());
        let empty_rules = RuleSet::new(vec![], Default::default()).unwrap();
        let r = resolve(&ds, &empty_rules, &ResolveConfig::default()).unwrap();
        assert!(r.per_doc.is_empty() && r.marginals.is_empty());
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = ResolveConfig {
            damping: 0.0,
            ..Default::default()
        };
        let ds = Dataset::default();
        let rules = RuleSet::new(vec![], Default::default()).unwrap();
        assert!(matches!(resolve(&ds, &rules, &cfg), Err(ResolveError::InvalidConfig(_))));
    }
}
