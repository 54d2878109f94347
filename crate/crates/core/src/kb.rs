//! Domain vocabulary shared by every stage: polarities, identifiers, ground
//! atoms, the fact store and the labeled dataset.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("empty {0} identifier")]
    EmptyIdentifier(&'static str),
    #[error("duplicate document '{0}'")]
    DuplicateDocument(DocumentId),
    #[error("duplicate tool '{0}'")]
    DuplicateTool(ToolId),
    #[error("label references unknown document '{0}'")]
    UnknownDocument(DocumentId),
    #[error("label references undeclared tool '{0}'")]
    UnknownTool(ToolId),
    #[error("duplicate label for document '{doc}' and tool '{tool}'")]
    DuplicateLabel { doc: DocumentId, tool: ToolId },
    #[error("invalid polarity '{0}'")]
    InvalidPolarity(String),
    #[error("invalid polarity order '{0}': expected a permutation of pos,neg,neu")]
    InvalidOrder(String),
}

/// Sentiment class of a document.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    /// All polarities in index order.
    pub const ALL: [Polarity; 3] = [Polarity::Positive, Polarity::Negative, Polarity::Neutral];

    pub fn index(self) -> usize {
        match self {
            Polarity::Positive => 0,
            Polarity::Negative => 1,
            Polarity::Neutral => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Short code used in CSV files.
    pub fn code(self) -> &'static str {
        match self {
            Polarity::Positive => "pos",
            Polarity::Negative => "neg",
            Polarity::Neutral => "neu",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "pos" => Some(Polarity::Positive),
            "neg" => Some(Polarity::Negative),
            "neu" => Some(Polarity::Neutral),
            _ => None,
        }
    }

    /// `+`, `-` or `0`.
    pub fn symbol(self) -> char {
        match self {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
            Polarity::Neutral => '0',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Polarity::Positive),
            '-' => Some(Polarity::Negative),
            '0' => Some(Polarity::Neutral),
            _ => None,
        }
    }

    /// Name of the unary polarity predicate, e.g. `IsPositive`.
    pub fn predicate(self) -> &'static str {
        match self {
            Polarity::Positive => "IsPositive",
            Polarity::Negative => "IsNegative",
            Polarity::Neutral => "IsNeutral",
        }
    }

    pub fn from_predicate(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.predicate() == name)
    }

    /// The two other polarities, in index order.
    pub fn others(self) -> [Polarity; 2] {
        match self {
            Polarity::Positive => [Polarity::Negative, Polarity::Neutral],
            Polarity::Negative => [Polarity::Positive, Polarity::Neutral],
            Polarity::Neutral => [Polarity::Positive, Polarity::Negative],
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Polarity {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let long = match t {
            "positive" => Some(Polarity::Positive),
            "negative" => Some(Polarity::Negative),
            "neutral" => Some(Polarity::Neutral),
            _ => None,
        };
        Polarity::from_code(t)
            .or(long)
            .ok_or_else(|| KbError::InvalidPolarity(s.to_string()))
    }
}

/// Preference order used to break ties between polarities. The first entry
/// wins a tie.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PolarityOrder([Polarity; 3]);

impl Default for PolarityOrder {
    fn default() -> Self {
        PolarityOrder([Polarity::Negative, Polarity::Positive, Polarity::Neutral])
    }
}

/// Scores closer than this (relative to their magnitude) are treated as tied.
const TIE_TOLERANCE: f64 = 1e-12;

impl PolarityOrder {
    pub fn new(order: [Polarity; 3]) -> Result<Self, KbError> {
        let distinct: BTreeSet<_> = order.iter().collect();
        if distinct.len() != 3 {
            return Err(KbError::InvalidOrder(format!("{:?}", order)));
        }
        Ok(PolarityOrder(order))
    }

    pub fn as_array(&self) -> [Polarity; 3] {
        self.0
    }

    /// 0 for the most preferred polarity.
    pub fn rank(&self, p: Polarity) -> usize {
        self.0.iter().position(|&q| q == p).expect("order is a permutation")
    }

    /// Highest-scoring polarity; `scores` is indexed by [`Polarity::index`].
    pub fn argmax(&self, scores: [f64; 3]) -> Polarity {
        let mut best = self.0[0];
        for &p in &self.0[1..] {
            let (s, b) = (scores[p.index()], scores[best.index()]);
            let tol = TIE_TOLERANCE * s.abs().max(b.abs()).max(1.0);
            if s > b + tol {
                best = p;
            }
        }
        best
    }

    pub fn argmax_counts(&self, counts: [usize; 3]) -> Polarity {
        let mut best = self.0[0];
        for &p in &self.0[1..] {
            if counts[p.index()] > counts[best.index()] {
                best = p;
            }
        }
        best
    }
}

impl fmt::Display for PolarityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for PolarityOrder {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<_> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(KbError::InvalidOrder(s.to_string()));
        }
        let mut order = [Polarity::Positive; 3];
        for (slot, part) in order.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| KbError::InvalidOrder(s.to_string()))?;
        }
        PolarityOrder::new(order).map_err(|_| KbError::InvalidOrder(s.to_string()))
    }
}

impl TryFrom<String> for PolarityOrder {
    type Error = KbError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PolarityOrder> for String {
    fn from(o: PolarityOrder) -> String {
        o.to_string()
    }
}

macro_rules! identifier {
    ($(#[$meta:meta])* $name:ident, $kind:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Result<Self, KbError> {
                let id = id.into();
                if id.is_empty() {
                    return Err(KbError::EmptyIdentifier($kind));
                }
                Ok($name(id))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl TryFrom<String> for $name {
            type Error = KbError;

            fn try_from(s: String) -> Result<Self, Self::Error> {
                $name::new(s)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = KbError;

            fn try_from(s: &str) -> Result<Self, Self::Error> {
                $name::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }
    };
}

identifier!(
    /// Identifier of a document, unique within a dataset.
    DocumentId,
    "document"
);
identifier!(
    /// Identifier of a cluster of semantically equivalent documents.
    ClusterId,
    "cluster"
);
identifier!(
    /// Identifier of a labeling tool.
    ToolId,
    "tool"
);

/// A ground atom over the fixed predicate vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `tool` assigned `polarity` to `doc`.
    ToolLabel { tool: ToolId, polarity: Polarity, doc: DocumentId },
    /// `doc` has polarity `polarity`.
    PolarityOf { polarity: Polarity, doc: DocumentId },
    /// The two documents are semantically equivalent. Canonical form has the
    /// smaller id first; see [`Atom::same_as`].
    SameAs(DocumentId, DocumentId),
}

impl Atom {
    pub fn tool_label(tool: ToolId, polarity: Polarity, doc: DocumentId) -> Self {
        Atom::ToolLabel { tool, polarity, doc }
    }

    pub fn polarity_of(polarity: Polarity, doc: DocumentId) -> Self {
        Atom::PolarityOf { polarity, doc }
    }

    /// Equivalence atom in canonical order.
    pub fn same_as(a: DocumentId, b: DocumentId) -> Self {
        if a <= b {
            Atom::SameAs(a, b)
        } else {
            Atom::SameAs(b, a)
        }
    }

    fn canonical(self) -> Self {
        match self {
            Atom::SameAs(a, b) => Atom::same_as(a, b),
            other => other,
        }
    }

    pub fn is_polarity(&self) -> bool {
        matches!(self, Atom::PolarityOf { .. })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::ToolLabel { tool, polarity, doc } => {
                write!(f, "Label({},{},{})", tool, polarity.symbol(), doc)
            }
            Atom::PolarityOf { polarity, doc } => write!(f, "{}({})", polarity.predicate(), doc),
            Atom::SameAs(a, b) => write!(f, "sameAs({},{})", a, b),
        }
    }
}

/// A signed atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }

    pub fn negated(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Prior,
    Inferred,
    InconsistencyDerived,
}

/// Set of ground literals with the provenance of their first insertion.
///
/// Equality is set equality over literals; provenance is metadata.
#[derive(Clone, Debug, Default)]
pub struct FactSet {
    facts: BTreeMap<Literal, Provenance>,
}

impl PartialEq for FactSet {
    fn eq(&self, other: &Self) -> bool {
        self.facts.len() == other.facts.len() && self.facts.keys().eq(other.facts.keys())
    }
}

impl Eq for FactSet {}

impl FactSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Inserts `lit`, returning `true` if it was new. The first provenance
    /// wins; tool labels and equivalences are always recorded as prior facts.
    pub fn add_literal(&mut self, lit: Literal, prov: Provenance) -> bool {
        let lit = Literal {
            atom: lit.atom.canonical(),
            positive: lit.positive,
        };
        let prov = match lit.atom {
            Atom::ToolLabel { .. } | Atom::SameAs(..) => Provenance::Prior,
            Atom::PolarityOf { .. } => prov,
        };
        match self.facts.entry(lit) {
            std::collections::btree_map::Entry::Occupied(_) => false,
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(prov);
                true
            }
        }
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.facts.contains_key(lit)
    }

    pub fn contains_atom(&self, atom: &Atom, positive: bool) -> bool {
        // Literal lookups need an owned key; atoms are small.
        self.facts.contains_key(&Literal {
            atom: atom.clone(),
            positive,
        })
    }

    pub fn provenance(&self, lit: &Literal) -> Option<Provenance> {
        self.facts.get(lit).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Literal, Provenance)> {
        self.facts.iter().map(|(l, p)| (l, *p))
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.facts.keys()
    }

    /// All `PolarityOf` literals, both signs.
    pub fn get_polarity_atoms(&self) -> BTreeSet<Literal> {
        self.facts.keys().filter(|l| l.atom.is_polarity()).cloned().collect()
    }

    /// Atoms present with both signs, in sorted order.
    pub fn conflicted_atoms(&self) -> Vec<&Atom> {
        self.facts
            .keys()
            .filter(|l| l.positive && self.contains_atom(&l.atom, false))
            .map(|l| &l.atom)
            .collect()
    }

    pub fn is_inconsistent(&self) -> bool {
        self.facts.keys().any(|l| l.positive && self.contains_atom(&l.atom, false))
    }
}

impl Extend<(Literal, Provenance)> for FactSet {
    fn extend<I: IntoIterator<Item = (Literal, Provenance)>>(&mut self, iter: I) {
        for (lit, prov) in iter {
            self.add_literal(lit, prov);
        }
    }
}

impl FromIterator<(Literal, Provenance)> for FactSet {
    fn from_iter<I: IntoIterator<Item = (Literal, Provenance)>>(iter: I) -> Self {
        let mut fs = FactSet::new();
        fs.extend(iter);
        fs
    }
}

/// Capability token for reading gold labels. Only the evaluation and report
/// code inside this crate can obtain one, so saturation, learning and
/// inference never see gold polarities.
#[derive(Debug)]
pub struct GoldAccess {
    _private: (),
}

impl GoldAccess {
    pub(crate) fn grant() -> Self {
        GoldAccess { _private: () }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: DocumentId,
    pub cluster: ClusterId,
    gold: Option<Polarity>,
}

impl Document {
    pub fn new(id: DocumentId, cluster: ClusterId) -> Self {
        Document { id, cluster, gold: None }
    }

    pub fn with_gold(id: DocumentId, cluster: ClusterId, gold: Option<Polarity>) -> Self {
        Document { id, cluster, gold }
    }

    pub fn gold(&self, _access: &GoldAccess) -> Option<Polarity> {
        self.gold
    }

    pub fn has_gold(&self) -> bool {
        self.gold.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub doc: DocumentId,
    pub tool: ToolId,
    pub polarity: Polarity,
}

impl Label {
    pub fn new(doc: DocumentId, tool: ToolId, polarity: Polarity) -> Self {
        Label { doc, tool, polarity }
    }
}

/// Documents with cluster membership, tool labels and optional gold labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    documents: Vec<Document>,
    labels: Vec<Label>,
    tools: IndexSet<ToolId>,
    doc_index: HashMap<DocumentId, usize>,
    // label indices per document, in input order
    by_doc: Vec<Vec<usize>>,
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset::new(Vec::new(), Vec::new()).expect("empty dataset is valid")
    }
}

impl Dataset {
    /// Builds a dataset whose tool set is inferred from the labels.
    pub fn new(documents: Vec<Document>, labels: Vec<Label>) -> Result<Self, KbError> {
        let tools: IndexSet<ToolId> = labels.iter().map(|l| l.tool.clone()).collect();
        Self::build(documents, tools, labels)
    }

    /// Builds a dataset with an explicit tool list; every label must use a
    /// declared tool.
    pub fn with_tools(documents: Vec<Document>, tools: Vec<ToolId>, labels: Vec<Label>) -> Result<Self, KbError> {
        let mut set = IndexSet::new();
        for t in tools {
            if !set.insert(t.clone()) {
                return Err(KbError::DuplicateTool(t));
            }
        }
        if let Some(l) = labels.iter().find(|l| !set.contains(&l.tool)) {
            return Err(KbError::UnknownTool(l.tool.clone()));
        }
        Self::build(documents, set, labels)
    }

    fn build(documents: Vec<Document>, tools: IndexSet<ToolId>, labels: Vec<Label>) -> Result<Self, KbError> {
        let mut doc_index = HashMap::with_capacity(documents.len());
        for (i, d) in documents.iter().enumerate() {
            if doc_index.insert(d.id.clone(), i).is_some() {
                return Err(KbError::DuplicateDocument(d.id.clone()));
            }
        }
        let mut by_doc = vec![Vec::new(); documents.len()];
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for (li, l) in labels.iter().enumerate() {
            let di = *doc_index.get(&l.doc).ok_or_else(|| KbError::UnknownDocument(l.doc.clone()))?;
            if !seen.insert((di, l.tool.clone())) {
                return Err(KbError::DuplicateLabel {
                    doc: l.doc.clone(),
                    tool: l.tool.clone(),
                });
            }
            by_doc[di].push(li);
        }
        Ok(Dataset {
            documents,
            labels,
            tools,
            doc_index,
            by_doc,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn tools(&self) -> &IndexSet<ToolId> {
        &self.tools
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, id: &DocumentId) -> Option<&Document> {
        self.doc_index.get(id).map(|&i| &self.documents[i])
    }

    pub fn document_index(&self, id: &DocumentId) -> Option<usize> {
        self.doc_index.get(id).copied()
    }

    /// Labels of one document, in input order.
    pub fn labels_of(&self, id: &DocumentId) -> impl Iterator<Item = &Label> {
        self.doc_index
            .get(id)
            .into_iter()
            .flat_map(move |&i| self.by_doc[i].iter().map(move |&li| &self.labels[li]))
    }

    pub fn label(&self, doc: &DocumentId, tool: &ToolId) -> Option<Polarity> {
        self.labels_of(doc).find(|l| &l.tool == tool).map(|l| l.polarity)
    }

    /// Clusters in order of first appearance; documents keep input order.
    pub fn group_by_cluster(&self) -> IndexMap<ClusterId, Vec<DocumentId>> {
        let mut out: IndexMap<ClusterId, Vec<DocumentId>> = IndexMap::new();
        for d in &self.documents {
            out.entry(d.cluster.clone()).or_default().push(d.id.clone());
        }
        out
    }

    /// The same documents and labels with gold labels removed.
    pub fn without_gold(&self) -> Dataset {
        let mut ds = self.clone();
        for d in &mut ds.documents {
            d.gold = None;
        }
        ds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(s: &str) -> DocumentId {
        DocumentId::new(s).unwrap()
    }

    fn is_pos(d: &str) -> Literal {
        Literal::pos(Atom::polarity_of(Polarity::Positive, doc(d)))
    }

    #[test]
    fn add_literal_into_empty_set() {
        let mut fs = FactSet::new();
        assert!(fs.add_literal(is_pos("d1"), Provenance::Prior));
        assert_eq!(fs.len(), 1);
        assert!(fs.contains(&is_pos("d1")));
    }

    #[test]
    fn add_literal_is_idempotent_and_keeps_first_provenance() {
        let mut fs = FactSet::new();
        fs.add_literal(is_pos("d1"), Provenance::Prior);
        assert!(!fs.add_literal(is_pos("d1"), Provenance::Inferred));
        assert_eq!(fs.len(), 1);
        assert_eq!(fs.provenance(&is_pos("d1")), Some(Provenance::Prior));
    }

    #[test]
    fn both_signs_make_the_set_inconsistent() {
        let mut fs = FactSet::new();
        fs.add_literal(is_pos("d1"), Provenance::Prior);
        assert!(!fs.is_inconsistent());
        fs.add_literal(is_pos("d1").negated(), Provenance::InconsistencyDerived);
        assert_eq!(fs.len(), 2);
        assert!(fs.is_inconsistent());
        assert_eq!(fs.conflicted_atoms().len(), 1);
    }

    #[test]
    fn prior_provenance_is_forced_for_evidence_atoms() {
        let mut fs = FactSet::new();
        let lit = Literal::pos(Atom::same_as(doc("b"), doc("a")));
        fs.add_literal(lit, Provenance::Inferred);
        let canon = Literal::pos(Atom::SameAs(doc("a"), doc("b")));
        assert_eq!(fs.provenance(&canon), Some(Provenance::Prior));
    }

    #[test]
    fn polarity_atoms_filter_by_kind() {
        let mut fs = FactSet::new();
        let label = Literal::pos(Atom::tool_label(ToolId::new("sw").unwrap(), Polarity::Positive, doc("d3")));
        fs.add_literal(label, Provenance::Prior);
        let p = Literal::pos(Atom::polarity_of(Polarity::Positive, doc("d3")));
        fs.add_literal(p.clone(), Provenance::Inferred);
        assert_eq!(fs.get_polarity_atoms(), BTreeSet::from([p]));
        assert!(FactSet::new().get_polarity_atoms().is_empty());
    }

    #[test]
    fn identifiers_reject_empty() {
        assert_eq!(DocumentId::new(""), Err(KbError::EmptyIdentifier("document")));
        assert!(ToolId::new("").is_err());
        assert!(ClusterId::new("").is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_labels_and_unknown_docs() {
        let docs = vec![Document::new(doc("d1"), ClusterId::new("c").unwrap())];
        let t = ToolId::new("t").unwrap();
        let dup = vec![
            Label::new(doc("d1"), t.clone(), Polarity::Positive),
            Label::new(doc("d1"), t.clone(), Polarity::Negative),
        ];
        assert!(matches!(Dataset::new(docs.clone(), dup), Err(KbError::DuplicateLabel { .. })));
        let unknown = vec![Label::new(doc("d9"), t.clone(), Polarity::Positive)];
        assert!(matches!(Dataset::new(docs.clone(), unknown), Err(KbError::UnknownDocument(_))));
        let undeclared = vec![Label::new(doc("d1"), t, Polarity::Positive)];
        assert!(matches!(
            Dataset::with_tools(docs, vec![], undeclared),
            Err(KbError::UnknownTool(_))
        ));
    }

    #[test]
    fn group_by_cluster_edge_cases() {
        assert!(Dataset::default().group_by_cluster().is_empty());
        let c = ClusterId::new("c").unwrap();
        let ds = Dataset::new(vec![Document::new(doc("x"), c.clone())], vec![]).unwrap();
        let groups = ds.group_by_cluster();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[&c], vec![doc("x")]);
    }

    #[test]
    fn tie_break_order() {
        let order = PolarityOrder::default();
        assert_eq!(order.argmax_counts([2, 2, 2]), Polarity::Negative);
        assert_eq!(order.argmax_counts([3, 2, 2]), Polarity::Positive);
        assert_eq!(order.argmax([0.4, 0.4, 0.2]), Polarity::Negative);
        assert_eq!(order.argmax([0.2, 0.2, 0.6]), Polarity::Neutral);
        let o: PolarityOrder = "neu,pos,neg".parse().unwrap();
        assert_eq!(o.argmax([1.0 / 3.0; 3]), Polarity::Neutral);
        assert_eq!(o.to_string(), "neu,pos,neg");
        assert!("pos,pos,neg".parse::<PolarityOrder>().is_err());
        assert!("pos,neg".parse::<PolarityOrder>().is_err());
    }

    #[test]
    fn gold_is_only_readable_with_access() {
        let d = Document::with_gold(doc("d"), ClusterId::new("c").unwrap(), Some(Polarity::Neutral));
        assert!(d.has_gold());
        assert_eq!(d.gold(&GoldAccess::grant()), Some(Polarity::Neutral));
    }
}
