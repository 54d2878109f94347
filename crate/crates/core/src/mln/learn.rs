//! Discriminative weight learning by diagonal Newton steps on the
//! conditional log-likelihood of the training assignment.

use serde::{Deserialize, Serialize};

use crate::kb::{Atom, FactSet, Literal};

use super::exact::ExactOracle;
use super::mcsat::mcsat_sample_statistics;
use super::sampler::SamplerConfig;
use super::{GroundNetwork, Lit, MlnError, WeightVector};

/// Observed value per query atom; `None` atoms are marginalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingAssignment(Vec<Option<bool>>);

impl TrainingAssignment {
    pub fn new(values: Vec<Option<bool>>) -> Self {
        TrainingAssignment(values)
    }

    /// Reads targets off a derived fact set: atoms present only positively
    /// are true, only negatively or not at all false, with both signs
    /// unobserved. A document whose observed atoms already break the
    /// exactly-one structure (two true, or all three false) is left fully
    /// unobserved.
    pub fn from_fact_set(net: &GroundNetwork, fs: &FactSet) -> Self {
        let mut values = Vec::with_capacity(net.num_query_atoms());
        for i in 0..net.num_query_atoms() {
            let atom: Atom = net.query_atom(i);
            let pos = fs.contains(&Literal::pos(atom.clone()));
            let neg = fs.contains(&Literal::neg(atom));
            values.push(match (pos, neg) {
                (true, true) => None,
                (true, false) => Some(true),
                (false, _) => Some(false),
            });
        }
        for doc in values.chunks_mut(3) {
            let trues = doc.iter().filter(|v| **v == Some(true)).count();
            let falses = doc.iter().filter(|v| **v == Some(false)).count();
            if trues > 1 || falses == 3 {
                doc.fill(None);
            }
        }
        TrainingAssignment(values)
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn num_observed(&self) -> usize {
        self.0.iter().filter(|v| v.is_some()).count()
    }

    /// One unit clause per observed atom.
    pub fn units(&self) -> Vec<Lit> {
        self.0.iter().enumerate().filter_map(|(i, v)| v.map(|b| Lit::new(i, b))).collect()
    }

    /// `(observed mask, wanted bits)` over the first 64 atoms.
    pub(crate) fn masks(&self) -> (u64, u64) {
        let mut mask = 0u64;
        let mut want = 0u64;
        for (i, v) in self.0.iter().enumerate().take(64) {
            if let Some(b) = v {
                mask |= 1 << i;
                if *b {
                    want |= 1 << i;
                }
            }
        }
        (mask, want)
    }
}

/// How the learner estimates expectations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expectations {
    /// Enumeration; fails when the network exceeds `cap` query atoms.
    Exact {
        cap: usize,
    },
    Sampled(SamplerConfig),
    /// Enumeration on each independent component of at most `cap` atoms,
    /// MC-SAT on larger ones.
    Auto {
        cap: usize,
        sampler: SamplerConfig,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnOptions {
    pub iterations: usize,
    pub damping: f64,
    pub max_step: f64,
    pub expectations: Expectations,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            iterations: 10,
            damping: 1e-4,
            max_step: 1.0,
            expectations: Expectations::Sampled(SamplerConfig::default()),
        }
    }
}

/// Gradient of the negative conditional log-likelihood per soft rule.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleGradient {
    pub rules: Vec<String>,
    /// `E_w[n_i] - n̄_i`
    pub gradient: Vec<f64>,
    pub expected: Vec<f64>,
    pub observed: Vec<f64>,
    /// `Var_w[n_i]`, the diagonal of the Hessian.
    pub variance: Vec<f64>,
}

enum Method {
    Exact(ExactOracle),
    Sampled(SamplerConfig),
}

struct Part {
    net: GroundNetwork,
    training: TrainingAssignment,
    method: Method,
}

/// Per-rule `(E_w[n], Var_w[n], n̄)` for one part.
type Stats = (Vec<f64>, Vec<f64>, Vec<f64>);

impl Part {
    fn stats(&self, dense: &[f64], stream: u64) -> Result<Stats, MlnError> {
        let (net, training) = (&self.net, &self.training);
        match &self.method {
            Method::Exact(oracle) => {
                let model = oracle.moments(dense, None)?;
                let cond = oracle.moments(dense, Some(training))?;
                Ok((model.mean, model.var, cond.mean))
            }
            Method::Sampled(cfg) => {
                let model = mcsat_sample_statistics(net, dense, cfg, None, 2 * stream)?;
                let observed = if training.num_observed() == training.len() {
                    let world: Vec<bool> = training.values().iter().map(|v| v.unwrap_or(false)).collect();
                    if !net.satisfies_hard(&world) {
                        return Err(MlnError::InfeasibleTraining);
                    }
                    net.rule_counts(&world)
                } else {
                    mcsat_sample_statistics(net, dense, cfg, Some(training), 2 * stream + 1)
                        .map_err(|e| match e {
                            MlnError::SampleSatFailed { .. } => MlnError::InfeasibleTraining,
                            other => other,
                        })?
                        .count_mean
                };
                Ok((model.count_mean, model.count_var, observed))
            }
        }
    }
}

struct Estimator {
    parts: Vec<Part>,
}

impl Estimator {
    fn new(net: &GroundNetwork, training: &TrainingAssignment, e: &Expectations) -> Result<Self, MlnError> {
        let whole = |method| Part {
            net: net.clone(),
            training: training.clone(),
            method,
        };
        let parts = match e {
            Expectations::Exact { cap } => vec![whole(Method::Exact(ExactOracle::new(net, *cap)?))],
            Expectations::Sampled(cfg) => {
                cfg.validate()?;
                vec![whole(Method::Sampled(cfg.clone()))]
            }
            Expectations::Auto { cap, sampler } => {
                sampler.validate()?;
                let mut parts = Vec::new();
                for c in net.components() {
                    let values = c
                        .documents
                        .iter()
                        .flat_map(|&d| training.values()[d * 3..d * 3 + 3].iter().copied())
                        .collect();
                    let method = if c.network.num_query_atoms() <= *cap {
                        Method::Exact(ExactOracle::new(&c.network, *cap)?)
                    } else {
                        Method::Sampled(sampler.clone())
                    };
                    parts.push(Part {
                        net: c.network,
                        training: TrainingAssignment::new(values),
                        method,
                    });
                }
                parts
            }
        };
        Ok(Estimator { parts })
    }

    fn gradient(&self, net: &GroundNetwork, dense: &[f64], round: u64) -> Result<RuleGradient, MlnError> {
        let soft = net.soft_rule_indices();
        let n_rules = net.rules().len();
        let mut expected = vec![0.0; n_rules];
        let mut variance = vec![0.0; n_rules];
        let mut observed = vec![0.0; n_rules];
        let n_parts = self.parts.len() as u64;
        // parts are independent, so means and variances add
        for (k, part) in self.parts.iter().enumerate() {
            let (e, v, o) = part.stats(dense, round * n_parts + k as u64)?;
            for &r in &soft {
                expected[r] += e[r];
                variance[r] += v[r];
                observed[r] += o[r];
            }
        }
        Ok(RuleGradient {
            rules: soft.iter().map(|&r| net.rules()[r].name.clone()).collect(),
            gradient: soft.iter().map(|&r| expected[r] - observed[r]).collect(),
            expected: soft.iter().map(|&r| expected[r]).collect(),
            observed: soft.iter().map(|&r| observed[r]).collect(),
            variance: soft.iter().map(|&r| variance[r]).collect(),
        })
    }
}

/// Gradient of the negative conditional log-likelihood at `weights`.
pub fn learner_gradient(
    net: &GroundNetwork,
    weights: &WeightVector,
    training: &TrainingAssignment,
    expectations: &Expectations,
) -> Result<RuleGradient, MlnError> {
    let est = Estimator::new(net, training, expectations)?;
    est.gradient(net, &net.dense_weights(weights), 0)
}

/// Runs `opts.iterations` diagonal Newton rounds from `init` and returns
/// the weights of every soft rule.
pub fn learn_weights(
    net: &GroundNetwork,
    training: &TrainingAssignment,
    init: &WeightVector,
    opts: &LearnOptions,
) -> Result<WeightVector, MlnError> {
    if training.len() != net.num_query_atoms() {
        return Err(MlnError::InvalidConfig(format!(
            "training assignment covers {} atoms, network has {}",
            training.len(),
            net.num_query_atoms()
        )));
    }
    if !(opts.damping > 0.0 && opts.max_step > 0.0) {
        return Err(MlnError::InvalidConfig("damping and max_step must be positive".into()));
    }
    let est = Estimator::new(net, training, &opts.expectations)?;
    let soft = net.soft_rule_indices();
    let mut dense = net.dense_weights(init);
    for round in 0..opts.iterations {
        let g = est.gradient(net, &dense, round as u64)?;
        for (k, &r) in soft.iter().enumerate() {
            let step = (-g.gradient[k] / (g.variance[k] + opts.damping)).clamp(-opts.max_step, opts.max_step);
            dense[r] += step;
            if !dense[r].is_finite() {
                return Err(MlnError::Diverged {
                    iteration: round,
                    rule: g.rules[k].clone(),
                });
            }
        }
    }
    Ok(soft.iter().map(|&r| (net.rules()[r].name.clone(), dense[r])).collect())
}
