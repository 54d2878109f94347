//! Detection and resolution of polarity-label inconsistencies across several
//! labeling tools.
//!
//! The pipeline turns tool labels and document clusters into a fact base,
//! saturates it, makes the contradictions explicit, learns Markov logic rule
//! weights without supervision, infers per-document polarity marginals and
//! finishes with a probability-weighted vote inside each cluster.
//!
//! Module map:
//!
//! - [`kb`]: vocabulary, datasets and the fact store.
//! - [`rules`]: weighted rule templates, the default rule set and the rule DSL.
//! - [`saturation`]: instantiation, fixpoint inference and inconsistency derivation.
//! - [`mln`]: grounding, exact inference, MC-SAT and weight learning.
//! - [`resolve`]: the end-to-end pipeline.
//! - [`baselines`]: majority-voting baselines.
//! - [`harness`]: file formats, synthetic data, evaluation and reports.

pub mod baselines;
pub mod harness;
pub mod kb;
pub mod mln;
pub mod resolve;
pub mod rules;
pub mod saturation;

pub use kb::{Atom, ClusterId, Dataset, Document, DocumentId, FactSet, Label, Literal, Polarity, PolarityOrder, Provenance, ToolId};
pub use rules::{RuleSet, RuleTemplate, RuleWeight};
