//! Weighted first-order rule templates over the polarity vocabulary.
//!
//! Rules are implications `B1 ^ ... ^ Bn -> H` whose variables range over
//! documents. The default rule set encodes in-cluster agreement, per-tool
//! trust and the exactly-one-polarity constraint. Extra rules can be written
//! in a one-rule-per-line DSL:
//!
//! ```text
//! # weight or 'hard', then body literals joined by '^', then one head literal
//! 1.5: sameAs(?a,?b) ^ IsPositive(?b) -> IsPositive(?a)
//! hard: IsPositive(?d) -> !IsNegative(?d)
//! 0.7: Label(tb,-,?d) -> IsNegative(?d)
//! ```

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::kb::{DocumentId, Polarity, ToolId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("line {line}, column {column}: expected {expected}")]
    Syntax { line: usize, column: usize, expected: String },
    #[error("line {line}, column {column}: unknown predicate '{name}'")]
    UnknownPredicate { line: usize, column: usize, name: String },
    #[error("rule '{rule}': head variable {variable} does not occur in the body")]
    UnboundHeadVariable { rule: String, variable: String },
    #[error("rule '{0}' has an empty head")]
    EmptyHead(String),
    #[error("rule '{rule}' has non-finite weight {weight}")]
    NonFiniteWeight { rule: String, weight: f64 },
    #[error("duplicate rule name '{0}'")]
    DuplicateName(String),
    #[error("cannot generate rules for an empty tool set")]
    EmptyToolSet,
    #[error("invalid variable name '{0}': variables start with '?'")]
    InvalidVariable(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Name includes the leading `?`.
    Variable(String),
    Constant(DocumentId),
}

impl Term {
    pub fn var(name: &str) -> Result<Self, RuleError> {
        if name.len() < 2 || !name.starts_with('?') {
            return Err(RuleError::InvalidVariable(name.to_string()));
        }
        Ok(Term::Variable(name.to_string()))
    }

    pub fn variable_name(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            Term::Constant(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(v) => f.write_str(v),
            Term::Constant(c) => write!(f, "{c}"),
        }
    }
}

/// A predicate applied to terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Polarity { polarity: Polarity, doc: Term },
    Label { tool: ToolId, polarity: Polarity, doc: Term },
    SameAs(Term, Term),
}

impl Pattern {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Pattern::Polarity { doc, .. } | Pattern::Label { doc, .. } => vec![doc],
            Pattern::SameAs(a, b) => vec![a, b],
        }
    }

    /// Evidence predicates are fixed by the data; polarity atoms are queried.
    pub fn is_evidence(&self) -> bool {
        !matches!(self, Pattern::Polarity { .. })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Polarity { polarity, doc } => write!(f, "{}({})", polarity.predicate(), doc),
            Pattern::Label { tool, polarity, doc } => {
                write!(f, "Label({},{},{})", tool, polarity.symbol(), doc)
            }
            Pattern::SameAs(a, b) => write!(f, "sameAs({a},{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternLiteral {
    pub pattern: Pattern,
    pub positive: bool,
}

impl PatternLiteral {
    pub fn pos(pattern: Pattern) -> Self {
        PatternLiteral { pattern, positive: true }
    }

    pub fn neg(pattern: Pattern) -> Self {
        PatternLiteral { pattern, positive: false }
    }

    pub fn negated(&self) -> Self {
        PatternLiteral {
            pattern: self.pattern.clone(),
            positive: !self.positive,
        }
    }
}

impl fmt::Display for PatternLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        write!(f, "{}", self.pattern)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuleWeight {
    Finite(f64),
    Hard,
}

impl RuleWeight {
    pub fn is_hard(&self) -> bool {
        matches!(self, RuleWeight::Hard)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            RuleWeight::Finite(w) => Some(*w),
            RuleWeight::Hard => None,
        }
    }
}

impl fmt::Display for RuleWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleWeight::Finite(w) => write!(f, "{w}"),
            RuleWeight::Hard => f.write_str("hard"),
        }
    }
}

/// A weighted implication. The head is a disjunction; every rule built by
/// this crate has a single head literal except the completeness constraint,
/// which has an empty body and a three-literal head.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleTemplate {
    name: String,
    body: Vec<PatternLiteral>,
    head: Vec<PatternLiteral>,
    weight: RuleWeight,
}

impl RuleTemplate {
    /// Validates range restriction: when the body is non-empty every head
    /// variable must occur in it. Body-less rules quantify over all documents.
    pub fn new(
        name: impl Into<String>,
        body: Vec<PatternLiteral>,
        head: Vec<PatternLiteral>,
        weight: RuleWeight,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        if head.is_empty() {
            return Err(RuleError::EmptyHead(name));
        }
        if let RuleWeight::Finite(w) = weight {
            if !w.is_finite() {
                return Err(RuleError::NonFiniteWeight { rule: name, weight: w });
            }
        }
        if !body.is_empty() {
            let bound: BTreeSet<&str> = body
                .iter()
                .flat_map(|l| l.pattern.terms())
                .filter_map(Term::variable_name)
                .collect();
            for var in head.iter().flat_map(|l| l.pattern.terms()).filter_map(Term::variable_name) {
                if !bound.contains(var) {
                    return Err(RuleError::UnboundHeadVariable {
                        rule: name,
                        variable: var.to_string(),
                    });
                }
            }
        }
        Ok(RuleTemplate { name, body, head, weight })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &[PatternLiteral] {
        &self.body
    }

    pub fn head(&self) -> &[PatternLiteral] {
        &self.head
    }

    pub fn weight(&self) -> RuleWeight {
        self.weight
    }

    pub fn is_hard(&self) -> bool {
        self.weight.is_hard()
    }

    /// Distinct variables in order of first occurrence (body, then head).
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for var in self
            .body
            .iter()
            .chain(&self.head)
            .flat_map(|l| l.pattern.terms())
            .filter_map(Term::variable_name)
        {
            if !out.contains(&var) {
                out.push(var);
            }
        }
        out
    }

    /// Material implication: `B1 ^ ... ^ Bn -> H` becomes `!B1 v ... v !Bn v H`.
    pub fn to_clause(&self) -> ClausePattern {
        let literals = self
            .body
            .iter()
            .map(PatternLiteral::negated)
            .chain(self.head.iter().cloned())
            .collect();
        ClausePattern {
            literals,
            weight: self.weight,
        }
    }

    /// DSL line for this rule, or `None` when the rule has no body or more
    /// than one head literal.
    pub fn to_dsl(&self) -> Option<String> {
        if self.body.is_empty() || self.head.len() != 1 {
            return None;
        }
        let body: Vec<String> = self.body.iter().map(ToString::to_string).collect();
        Some(format!("{}: {} -> {}", self.weight, body.join(" ^ "), self.head[0]))
    }
}

impl fmt::Display for RuleTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.body.iter().map(ToString::to_string).collect();
        let head: Vec<String> = self.head.iter().map(ToString::to_string).collect();
        write!(f, "{}: {} -> {}", self.weight, body.join(" ^ "), head.join(" v "))
    }
}

/// A rule as a weighted disjunction of pattern literals.
#[derive(Clone, Debug, PartialEq)]
pub struct ClausePattern {
    pub literals: Vec<PatternLiteral>,
    pub weight: RuleWeight,
}

impl fmt::Display for ClausePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits: Vec<String> = self.literals.iter().map(ToString::to_string).collect();
        write!(f, "{}: {}", self.weight, lits.join(" v "))
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RuleSet {
    rules: Vec<RuleTemplate>,
    vocabulary: IndexSet<ToolId>,
}

impl RuleSet {
    pub fn new(rules: Vec<RuleTemplate>, vocabulary: IndexSet<ToolId>) -> Result<Self, RuleError> {
        let mut names = BTreeSet::new();
        for r in &rules {
            if !names.insert(r.name.as_str()) {
                return Err(RuleError::DuplicateName(r.name.clone()));
            }
        }
        Ok(RuleSet { rules, vocabulary })
    }

    pub fn rules(&self) -> &[RuleTemplate] {
        &self.rules
    }

    pub fn vocabulary(&self) -> &IndexSet<ToolId> {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&RuleTemplate> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn soft_rules(&self) -> impl Iterator<Item = &RuleTemplate> {
        self.rules.iter().filter(|r| !r.is_hard())
    }

    pub fn hard_rules(&self) -> impl Iterator<Item = &RuleTemplate> {
        self.rules.iter().filter(|r| r.is_hard())
    }

    /// Appends `other`'s rules. Names must stay unique.
    pub fn extend(&mut self, other: RuleSet) -> Result<(), RuleError> {
        for r in other.rules {
            if self.get(&r.name).is_some() {
                return Err(RuleError::DuplicateName(r.name));
            }
            self.rules.push(r);
        }
        self.vocabulary.extend(other.vocabulary);
        Ok(())
    }

    /// DSL text for every rule expressible in the DSL, one per line.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for line in self.rules.iter().filter_map(RuleTemplate::to_dsl) {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn var(name: &str) -> Term {
    Term::Variable(name.to_string())
}

fn is_pol(p: Polarity, t: Term) -> Pattern {
    Pattern::Polarity { polarity: p, doc: t }
}

fn long_name(p: Polarity) -> &'static str {
    match p {
        Polarity::Positive => "positive",
        Polarity::Negative => "negative",
        Polarity::Neutral => "neutral",
    }
}

/// Default rule set for `tools`.
///
/// - `same_as_<pol>_fwd`: `sameAs(?di,?dj) ^ IsX(?dj) -> IsX(?di)`, and
///   `same_as_<pol>_bwd` its mirror, for all three polarities (soft);
/// - `label_<tool>_<pol>`: `Label(tool,pol,?d) -> IsX(?d)` (soft);
/// - `exclusive_<p>_<q>`: `IsP(?d) -> !IsQ(?d)` for p != q (hard);
/// - `complete`: `IsPositive(?d) v IsNegative(?d) v IsNeutral(?d)` (hard).
pub fn generate_default_rules(tools: &IndexSet<ToolId>, init_weight: f64) -> Result<RuleSet, RuleError> {
    if tools.is_empty() {
        return Err(RuleError::EmptyToolSet);
    }
    let soft = RuleWeight::Finite(init_weight);
    let mut rules = Vec::with_capacity(6 + 3 * tools.len() + 7);
    let (di, dj) = (var("?di"), var("?dj"));
    for p in Polarity::ALL {
        let same = Pattern::SameAs(di.clone(), dj.clone());
        rules.push(RuleTemplate::new(
            format!("same_as_{}_fwd", long_name(p)),
            vec![PatternLiteral::pos(same.clone()), PatternLiteral::pos(is_pol(p, dj.clone()))],
            vec![PatternLiteral::pos(is_pol(p, di.clone()))],
            soft,
        )?);
        rules.push(RuleTemplate::new(
            format!("same_as_{}_bwd", long_name(p)),
            vec![PatternLiteral::pos(same), PatternLiteral::pos(is_pol(p, di.clone()))],
            vec![PatternLiteral::pos(is_pol(p, dj.clone()))],
            soft,
        )?);
    }
    let d = var("?d");
    for tool in tools {
        for p in Polarity::ALL {
            let label = Pattern::Label {
                tool: tool.clone(),
                polarity: p,
                doc: d.clone(),
            };
            rules.push(RuleTemplate::new(
                format!("label_{}_{}", tool, long_name(p)),
                vec![PatternLiteral::pos(label)],
                vec![PatternLiteral::pos(is_pol(p, d.clone()))],
                soft,
            )?);
        }
    }
    for p in Polarity::ALL {
        for q in p.others() {
            rules.push(RuleTemplate::new(
                format!("exclusive_{}_{}", long_name(p), long_name(q)),
                vec![PatternLiteral::pos(is_pol(p, d.clone()))],
                vec![PatternLiteral::neg(is_pol(q, d.clone()))],
                RuleWeight::Hard,
            )?);
        }
    }
    rules.push(RuleTemplate::new(
        "complete",
        vec![],
        Polarity::ALL.iter().map(|&p| PatternLiteral::pos(is_pol(p, d.clone()))).collect(),
        RuleWeight::Hard,
    )?);
    RuleSet::new(rules, tools.clone())
}

/// Parses DSL text. Rules are named `rule_<n>` by their 1-based position.
pub fn parse_rules(text: &str) -> Result<RuleSet, RuleError> {
    let mut rules = Vec::new();
    let mut vocabulary = IndexSet::new();
    for (i, raw) in text.lines().enumerate() {
        let mut p = LineParser::new(raw, i + 1);
        p.skip_ws();
        if p.at_end() || p.peek() == Some('#') {
            continue;
        }
        let name = format!("rule_{}", rules.len() + 1);
        let rule = p.rule(&name)?;
        for lit in rule.body.iter().chain(&rule.head) {
            if let Pattern::Label { tool, .. } = &lit.pattern {
                vocabulary.insert(tool.clone());
            }
        }
        rules.push(rule);
    }
    RuleSet::new(rules, vocabulary)
}

struct LineParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> LineParser<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        LineParser {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, expected: &str) -> RuleError {
        RuleError::Syntax {
            line: self.line,
            column: self.pos + 1,
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, c: char, what: &str) -> Result<(), RuleError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn is_ident_char(c: char) -> bool {
        c.is_alphanumeric() || c == '_' || c == '.'
    }

    fn ident(&mut self, what: &str) -> Result<String, RuleError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if Self::is_ident_char(c)) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error(what));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn rule(&mut self, name: &str) -> Result<RuleTemplate, RuleError> {
        let weight = self.weight()?;
        self.expect(':', "':' after the weight")?;
        let mut body = vec![self.literal()?];
        loop {
            self.skip_ws();
            if self.peek() == Some('^') {
                self.pos += 1;
                body.push(self.literal()?);
            } else {
                break;
            }
        }
        self.skip_ws();
        if self.chars[self.pos..].starts_with(&['-', '>']) {
            self.pos += 2;
        } else {
            return Err(self.error("'^' or '->'"));
        }
        let head = self.literal()?;
        self.skip_ws();
        if !(self.at_end() || self.peek() == Some('#')) {
            return Err(self.error("end of line"));
        }
        RuleTemplate::new(name, body, vec![head], weight)
    }

    fn weight(&mut self) -> Result<RuleWeight, RuleError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c != ':' && !c.is_whitespace()) {
            self.pos += 1;
        }
        let token: String = self.chars[start..self.pos].iter().collect();
        if token == "hard" {
            return Ok(RuleWeight::Hard);
        }
        match token.parse::<f64>() {
            Ok(w) if w.is_finite() => Ok(RuleWeight::Finite(w)),
            _ => {
                self.pos = start;
                Err(self.error("a weight ('hard' or a finite number)"))
            }
        }
    }

    fn literal(&mut self) -> Result<PatternLiteral, RuleError> {
        self.skip_ws();
        let positive = if self.peek() == Some('!') {
            self.pos += 1;
            false
        } else {
            true
        };
        self.skip_ws();
        let column = self.pos + 1;
        let pred = self.ident("a predicate")?;
        self.expect('(', "'(' after the predicate name")?;
        let pattern = if let Some(p) = Polarity::from_predicate(&pred) {
            let doc = self.term()?;
            Pattern::Polarity { polarity: p, doc }
        } else if pred == "sameAs" {
            let a = self.term()?;
            self.expect(',', "','")?;
            let b = self.term()?;
            Pattern::SameAs(a, b)
        } else if pred == "Label" {
            let tool = self.ident("a tool identifier")?;
            self.expect(',', "','")?;
            let polarity = self.polarity()?;
            self.expect(',', "','")?;
            let doc = self.term()?;
            Pattern::Label {
                tool: ToolId::new(tool).expect("identifier is non-empty"),
                polarity,
                doc,
            }
        } else {
            return Err(RuleError::UnknownPredicate {
                line: self.line,
                column,
                name: pred,
            });
        };
        self.expect(')', "')'")?;
        Ok(PatternLiteral { pattern, positive })
    }

    fn polarity(&mut self) -> Result<Polarity, RuleError> {
        self.skip_ws();
        if let Some(p) = self.peek().and_then(Polarity::from_symbol) {
            self.pos += 1;
            return Ok(p);
        }
        let start = self.pos;
        let word = self.ident("a polarity (+, -, 0)")?;
        Polarity::from_code(&word).ok_or_else(|| {
            self.pos = start;
            self.error("a polarity (+, -, 0)")
        })
    }

    fn term(&mut self) -> Result<Term, RuleError> {
        self.skip_ws();
        if self.peek() == Some('?') {
            self.pos += 1;
            let name = self.ident("a variable name after '?'")?;
            Ok(Term::Variable(format!("?{name}")))
        } else {
            let id = self.ident("a term (?variable or document id)")?;
            Ok(Term::Constant(DocumentId::new(id).expect("identifier is non-empty")))
        }
    }
}
