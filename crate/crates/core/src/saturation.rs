//! Fact instantiation, fixpoint polarity inference and explicit
//! inconsistency derivation, plus violation counts over raw labels.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::kb::{Atom, Dataset, DocumentId, FactSet, Literal, Polarity, Provenance};

/// Violation counts for one dataset and fact base.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconsistencyReport {
    /// (tool, unordered same-cluster document pair) with differing labels.
    pub in_tool_violations: usize,
    /// (document, unordered tool pair) with differing labels.
    pub inter_tool_violations: usize,
    /// Atoms present with both signs in the fact base.
    pub conflicted_atoms: usize,
}

/// Prior facts: one label atom per tool label and one equivalence atom per
/// unordered pair inside each cluster. Pairing every member of a cluster
/// with every other already yields the transitive closure.
pub fn instantiate(ds: &Dataset) -> FactSet {
    let mut fs = FactSet::new();
    for l in ds.labels() {
        let atom = Atom::tool_label(l.tool.clone(), l.polarity, l.doc.clone());
        fs.add_literal(Literal::pos(atom), Provenance::Prior);
    }
    for docs in ds.group_by_cluster().values() {
        for (i, a) in docs.iter().enumerate() {
            for b in &docs[i + 1..] {
                fs.add_literal(Literal::pos(Atom::same_as(a.clone(), b.clone())), Provenance::Prior);
            }
        }
    }
    fs
}

/// Closes `fs` under label-to-polarity inference and polarity propagation
/// across equivalent documents (both directions, all polarities).
///
/// Semi-naive: only polarity facts that are new to the worklist trigger
/// propagation, so each (document, polarity) pair is expanded once.
pub fn saturate(fs: &FactSet) -> FactSet {
    let mut out = fs.clone();
    let mut neighbours: BTreeMap<&DocumentId, Vec<&DocumentId>> = BTreeMap::new();
    let mut queue: VecDeque<(Polarity, DocumentId)> = VecDeque::new();

    for lit in fs.literals().filter(|l| l.positive) {
        match &lit.atom {
            Atom::SameAs(a, b) => {
                neighbours.entry(a).or_default().push(b);
                neighbours.entry(b).or_default().push(a);
            }
            Atom::PolarityOf { polarity, doc } => queue.push_back((*polarity, doc.clone())),
            Atom::ToolLabel { .. } => {}
        }
    }

    // label facts -> polarity facts; a single pass suffices since nothing
    // later produces new label facts
    for lit in fs.literals().filter(|l| l.positive) {
        if let Atom::ToolLabel { polarity, doc, .. } = &lit.atom {
            let derived = Literal::pos(Atom::polarity_of(*polarity, doc.clone()));
            if out.add_literal(derived, Provenance::Inferred) {
                queue.push_back((*polarity, doc.clone()));
            }
        }
    }

    while let Some((polarity, doc)) = queue.pop_front() {
        let Some(adjacent) = neighbours.get(&doc) else { continue };
        for &other in adjacent {
            let derived = Literal::pos(Atom::polarity_of(polarity, other.clone()));
            if out.add_literal(derived, Provenance::Inferred) {
                queue.push_back((polarity, other.clone()));
            }
        }
    }
    out
}

/// For every positive polarity fact, adds the negation of the two other
/// polarities of that document.
pub fn derive_inconsistencies(fs: &FactSet) -> FactSet {
    let mut out = fs.clone();
    for lit in fs.literals().filter(|l| l.positive) {
        if let Atom::PolarityOf { polarity, doc } = &lit.atom {
            for other in polarity.others() {
                let neg = Literal::neg(Atom::polarity_of(other, doc.clone()));
                out.add_literal(neg, Provenance::InconsistencyDerived);
            }
        }
    }
    out
}

/// Counts in-tool and inter-tool disagreements over the raw labels of `ds`
/// and the conflicted atoms of `fs`. Each unordered pair counts once.
pub fn measure_inconsistency(ds: &Dataset, fs: &FactSet) -> InconsistencyReport {
    let mut in_tool = 0;
    for docs in ds.group_by_cluster().values() {
        for tool in ds.tools() {
            let labels: Vec<Polarity> = docs.iter().filter_map(|d| ds.label(d, tool)).collect();
            in_tool += count_disagreeing_pairs(&labels);
        }
    }
    let mut inter_tool = 0;
    for d in ds.documents() {
        let labels: Vec<Polarity> = ds.labels_of(&d.id).map(|l| l.polarity).collect();
        inter_tool += count_disagreeing_pairs(&labels);
    }
    InconsistencyReport {
        in_tool_violations: in_tool,
        inter_tool_violations: inter_tool,
        conflicted_atoms: fs.conflicted_atoms().len(),
    }
}

fn count_disagreeing_pairs(labels: &[Polarity]) -> usize {
    let mut counts = [0usize; 3];
    for p in labels {
        counts[p.index()] += 1;
    }
    let n = labels.len();
    let all_pairs = n * n.saturating_sub(1) / 2;
    let agreeing: usize = counts.iter().map(|&c| c * c.saturating_sub(1) / 2).sum();
    all_pairs - agreeing
}
