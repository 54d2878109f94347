//! Markov logic network over the polarity query atoms.
//!
//! Evidence (tool labels and equivalences) is fixed under the closed-world
//! assumption and compiled away during grounding, so a world is just a
//! boolean per `(document, polarity)` pair. Query atom `3 * doc + polarity`
//! follows dataset document order and [`Polarity::index`].

mod dump;
mod exact;
mod ground;
mod infer;
mod learn;
mod mcsat;
mod sampler;

use std::ops::Deref;

use indexmap::IndexMap;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::kb::{Atom, DocumentId, Polarity, PolarityOrder};
use crate::rules::RuleWeight;

pub use dump::dump_network;
pub use exact::{exact_cll, exact_marginals, ExactOracle, Moments, DEFAULT_ORACLE_CAP, MAX_ORACLE_CAP};
pub use ground::ground;
pub use infer::infer_marginals;
pub use learn::{learn_weights, learner_gradient, Expectations, LearnOptions, RuleGradient, TrainingAssignment};
pub use mcsat::{mcsat_marginals, mcsat_sample_statistics, SampleStatistics};
pub use sampler::{sa_step, samplesat, solution_walk, walksat_step, SampleSatOutcome, SamplerConfig, SatState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlnError {
    #[error("rule '{rule}' references tool '{tool}' which is absent from the dataset")]
    UnknownTool { rule: String, tool: String },
    #[error("rule '{rule}' references document '{doc}' which is absent from the dataset")]
    UnknownDocument { rule: String, doc: String },
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("hard rule '{0}' has a grounding that the evidence falsifies")]
    Unsatisfiable(String),
    #[error("instance has {atoms} query atoms, above the exact-inference cap of {cap}")]
    OverCap { atoms: usize, cap: usize },
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("SampleSat found no assignment satisfying the hard clauses within {flips} flips")]
    SampleSatFailed { flips: usize },
    #[error("walksat step requested but every clause is satisfied")]
    NoViolatedClause,
    #[error("sampled world violates a hard clause")]
    HardViolation,
    #[error("training assignment is inconsistent with the hard clauses")]
    InfeasibleTraining,
    #[error("weights diverged at iteration {iteration} (rule '{rule}'); lower max_step or raise damping")]
    Diverged { iteration: usize, rule: String },
}

/// Literal over a query atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub atom: usize,
    pub positive: bool,
}

impl Lit {
    pub fn new(atom: usize, positive: bool) -> Self {
        Lit { atom, positive }
    }

    #[inline]
    pub fn holds(&self, world: &[bool]) -> bool {
        world[self.atom] == self.positive
    }

    pub fn negated(self) -> Self {
        Lit {
            atom: self.atom,
            positive: !self.positive,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundClause {
    pub literals: Vec<Lit>,
    pub weight: RuleWeight,
    /// Index into [`GroundNetwork::rules`] of the rule that produced it.
    pub rule: usize,
}

impl GroundClause {
    pub fn is_hard(&self) -> bool {
        self.weight.is_hard()
    }

    #[inline]
    pub fn is_satisfied(&self, world: &[bool]) -> bool {
        self.literals.iter().any(|l| l.holds(world))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleInfo {
    pub name: String,
    pub weight: RuleWeight,
}

/// Truth assignment to the query atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct World(Vec<bool>);

impl World {
    pub fn new(values: Vec<bool>) -> Self {
        World(values)
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl Deref for World {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for World {
    fn from(v: Vec<bool>) -> Self {
        World(v)
    }
}

/// Learnable weights of the soft rules, by rule name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(IndexMap<String, f64>);

impl WeightVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, rule: &str) -> Option<f64> {
        self.0.get(rule).copied()
    }

    pub fn set(&mut self, rule: impl Into<String>, w: f64) {
        self.0.insert(rule.into(), w);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, f64)> for WeightVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        WeightVector(iter.into_iter().collect())
    }
}

/// Per-document distribution over the three polarities.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Marginals {
    documents: Vec<DocumentId>,
    probs: Vec<[f64; 3]>,
}

impl Marginals {
    pub fn new(documents: Vec<DocumentId>, probs: Vec<[f64; 3]>) -> Self {
        assert_eq!(documents.len(), probs.len());
        Marginals { documents, probs }
    }

    pub(crate) fn from_atom_probabilities(documents: &[DocumentId], atoms: &[f64]) -> Self {
        let probs = atoms.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        Marginals::new(documents.to_vec(), probs)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn row(&self, doc: &DocumentId) -> Option<[f64; 3]> {
        self.documents.iter().position(|d| d == doc).map(|i| self.probs[i])
    }

    pub fn get(&self, doc: &DocumentId, p: Polarity) -> Option<f64> {
        self.row(doc).map(|r| r[p.index()])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DocumentId, [f64; 3])> {
        self.documents.iter().zip(self.probs.iter().copied())
    }

    /// Probability of query atom `i`.
    pub fn atom(&self, i: usize) -> f64 {
        self.probs[i / 3][i % 3]
    }

    pub fn argmax(&self, order: &PolarityOrder) -> IndexMap<DocumentId, Polarity> {
        self.iter().map(|(d, row)| (d.clone(), order.argmax(row))).collect()
    }

    /// Largest absolute difference over all atoms; documents must match.
    pub fn linf_distance(&self, other: &Marginals) -> f64 {
        assert_eq!(self.documents, other.documents);
        self.probs
            .iter()
            .zip(&other.probs)
            .flat_map(|(a, b)| (0..3).map(move |k| (a[k] - b[k]).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize)]
struct Row {
    positive: f64,
    negative: f64,
    neutral: f64,
}

impl Serialize for Marginals {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.documents.len()))?;
        for (d, r) in self.iter() {
            map.serialize_entry(
                d.as_str(),
                &Row {
                    positive: r[0],
                    negative: r[1],
                    neutral: r[2],
                },
            )?;
        }
        map.end()
    }
}

/// One independent part of a [`GroundNetwork`].
#[derive(Clone, Debug)]
pub struct Component {
    /// Indices of the part's documents in the parent network, ascending.
    pub documents: Vec<usize>,
    pub network: GroundNetwork,
}

/// Weighted ground clauses over the query atoms of a dataset.
#[derive(Clone, Debug)]
pub struct GroundNetwork {
    documents: Vec<DocumentId>,
    evidence: Vec<Atom>,
    rules: Vec<RuleInfo>,
    clauses: Vec<GroundClause>,
    rule_clauses: Vec<Vec<usize>>,
    // groundings satisfied by the evidence alone, dropped from `clauses`
    trivially_true: Vec<usize>,
}

impl GroundNetwork {
    pub fn documents(&self) -> &[DocumentId] {
        &self.documents
    }

    pub fn num_query_atoms(&self) -> usize {
        self.documents.len() * 3
    }

    pub fn atom_index(&self, doc: usize, p: Polarity) -> usize {
        doc * 3 + p.index()
    }

    pub fn query_atom(&self, i: usize) -> Atom {
        let p = Polarity::from_index(i % 3).expect("index in range");
        Atom::polarity_of(p, self.documents[i / 3].clone())
    }

    /// Evidence atoms fixed to true; every other evidence grounding is false.
    pub fn evidence(&self) -> &[Atom] {
        &self.evidence
    }

    pub fn rules(&self) -> &[RuleInfo] {
        &self.rules
    }

    pub fn clauses(&self) -> &[GroundClause] {
        &self.clauses
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    /// Indices of the clauses grounded from `name`.
    pub fn rule_clauses(&self, name: &str) -> Option<&[usize]> {
        self.rule_index(name).map(|i| self.rule_clauses[i].as_slice())
    }

    pub fn hard_clauses(&self) -> impl Iterator<Item = &GroundClause> {
        self.clauses.iter().filter(|c| c.is_hard())
    }

    pub fn soft_clauses(&self) -> impl Iterator<Item = &GroundClause> {
        self.clauses.iter().filter(|c| !c.is_hard())
    }

    /// Indices of the rules with finite weight, in rule order.
    pub fn soft_rule_indices(&self) -> Vec<usize> {
        (0..self.rules.len()).filter(|&i| !self.rules[i].weight.is_hard()).collect()
    }

    /// Grounding weights from the rule templates.
    pub fn initial_weights(&self) -> WeightVector {
        self.rules
            .iter()
            .filter_map(|r| r.weight.finite().map(|w| (r.name.clone(), w)))
            .collect()
    }

    /// Weight per rule index: `weights` where given, else the template
    /// weight; hard rules map to infinity.
    pub fn dense_weights(&self, weights: &WeightVector) -> Vec<f64> {
        self.rules
            .iter()
            .map(|r| match r.weight {
                RuleWeight::Hard => f64::INFINITY,
                RuleWeight::Finite(w0) => weights.get(&r.name).unwrap_or(w0),
            })
            .collect()
    }

    pub fn satisfies_hard(&self, world: &[bool]) -> bool {
        self.hard_clauses().all(|c| c.is_satisfied(world))
    }

    /// Satisfied groundings per rule index, including groundings the
    /// evidence alone satisfies.
    pub fn rule_counts(&self, world: &[bool]) -> Vec<f64> {
        let mut counts: Vec<f64> = self.trivially_true.iter().map(|&c| c as f64).collect();
        for (r, idx) in self.rule_clauses.iter().enumerate() {
            counts[r] += idx.iter().filter(|&&c| self.clauses[c].is_satisfied(world)).count() as f64;
        }
        counts
    }

    /// Number of groundings of `rule` satisfied by the evidence and `world`.
    pub fn count_true_groundings(&self, world: &[bool], rule: &str) -> Result<usize, MlnError> {
        let r = self.rule_index(rule).ok_or_else(|| MlnError::UnknownRule(rule.to_string()))?;
        let live = self.rule_clauses[r]
            .iter()
            .filter(|&&c| self.clauses[c].is_satisfied(world))
            .count();
        Ok(live + self.trivially_true[r])
    }

    /// Splits the network into parts that share no clause. Each part keeps
    /// the full rule list; evidence and the counts of evidence-satisfied
    /// groundings stay with the parent (they shift every world equally).
    pub fn components(&self) -> Vec<Component> {
        let n = self.documents.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for c in &self.clauses {
            let first = find(&mut parent, c.literals[0].atom / 3);
            for l in &c.literals[1..] {
                let other = find(&mut parent, l.atom / 3);
                if other != first {
                    parent[other] = first;
                }
            }
        }
        let mut part_of: IndexMap<usize, Vec<usize>> = IndexMap::new();
        for d in 0..n {
            let root = find(&mut parent, d);
            part_of.entry(root).or_default().push(d);
        }
        let mut local = vec![0usize; n];
        for docs in part_of.values() {
            for (i, &d) in docs.iter().enumerate() {
                local[d] = i;
            }
        }
        let mut parts: Vec<Component> = part_of
            .values()
            .map(|docs| Component {
                documents: docs.clone(),
                network: GroundNetwork {
                    documents: docs.iter().map(|&d| self.documents[d].clone()).collect(),
                    evidence: Vec::new(),
                    rules: self.rules.clone(),
                    clauses: Vec::new(),
                    rule_clauses: vec![Vec::new(); self.rules.len()],
                    trivially_true: vec![0; self.rules.len()],
                },
            })
            .collect();
        let index_of: IndexMap<usize, usize> = part_of.keys().enumerate().map(|(i, &root)| (root, i)).collect();
        let mut clause_part = vec![usize::MAX; self.clauses.len()];
        for (ci, c) in self.clauses.iter().enumerate() {
            let p = index_of[&find(&mut parent, c.literals[0].atom / 3)];
            let net = &mut parts[p].network;
            clause_part[ci] = net.clauses.len();
            net.clauses.push(GroundClause {
                literals: c
                    .literals
                    .iter()
                    .map(|l| Lit::new(local[l.atom / 3] * 3 + l.atom % 3, l.positive))
                    .collect(),
                weight: c.weight,
                rule: c.rule,
            });
        }
        // merged hard clauses may be listed under several rules
        for (r, idx) in self.rule_clauses.iter().enumerate() {
            for &ci in idx {
                let p = index_of[&find(&mut parent, self.clauses[ci].literals[0].atom / 3)];
                parts[p].network.rule_clauses[r].push(clause_part[ci]);
            }
        }
        parts
    }

    /// `sum_i w_i n_i(world)` over soft rules, or `-inf` when a hard clause
    /// is violated.
    pub fn world_log_weight(&self, world: &[bool], weights: &WeightVector) -> f64 {
        if !self.satisfies_hard(world) {
            return f64::NEG_INFINITY;
        }
        let dense = self.dense_weights(weights);
        let counts = self.rule_counts(world);
        self.soft_rule_indices().into_iter().map(|i| dense[i] * counts[i]).sum()
    }
}
