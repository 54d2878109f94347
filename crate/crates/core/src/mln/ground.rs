//! Closed-world grounding with evidence simplification.
//!
//! Each rule is turned into its clause form and grounded over documents.
//! Positive evidence atoms in a rule body drive the enumeration: a grounding
//! whose body evidence is absent is satisfied under the closed world, so it
//! is only counted, never materialized. Remaining variables range over all
//! documents.
//! `sameAs` is read exactly as stored, in canonical order; symmetry comes
//! from the paired in-tool rules.

use std::collections::{HashMap, HashSet};

use crate::kb::{Atom, Dataset, DocumentId, FactSet, Polarity, Provenance, ToolId};
use crate::rules::{Pattern, RuleSet, RuleTemplate, RuleWeight, Term};

use super::{GroundClause, GroundNetwork, Lit, MlnError, RuleInfo};

const EXACTLY_ONE: &str = "exactly_one";

struct Evidence {
    labels: HashSet<(usize, Polarity, usize)>,
    labels_by: HashMap<(usize, Polarity), Vec<usize>>,
    same_as: HashSet<(usize, usize)>,
    pairs: Vec<(usize, usize)>,
    atoms: Vec<Atom>,
}

fn collect_evidence(fs: &FactSet, doc_ix: &HashMap<&DocumentId, usize>, tool_ix: &HashMap<&ToolId, usize>) -> Evidence {
    let mut ev = Evidence {
        labels: HashSet::new(),
        labels_by: HashMap::new(),
        same_as: HashSet::new(),
        pairs: Vec::new(),
        atoms: Vec::new(),
    };
    for (lit, prov) in fs.iter() {
        if !lit.positive || prov != Provenance::Prior {
            continue;
        }
        match &lit.atom {
            Atom::ToolLabel { tool, polarity, doc } => {
                let (Some(&t), Some(&d)) = (tool_ix.get(tool), doc_ix.get(doc)) else {
                    continue;
                };
                if ev.labels.insert((t, *polarity, d)) {
                    ev.labels_by.entry((t, *polarity)).or_default().push(d);
                    ev.atoms.push(lit.atom.clone());
                }
            }
            Atom::SameAs(a, b) => {
                let (Some(&a), Some(&b)) = (doc_ix.get(a), doc_ix.get(b)) else {
                    continue;
                };
                if ev.same_as.insert((a, b)) {
                    ev.pairs.push((a, b));
                    ev.atoms.push(lit.atom.clone());
                }
            }
            Atom::PolarityOf { .. } => {}
        }
    }
    // fact sets iterate in atom order; keep joins in dataset order
    for docs in ev.labels_by.values_mut() {
        docs.sort_unstable();
    }
    ev.pairs.sort_unstable();
    ev
}

/// Grounds `rules` against the prior facts of `fs` for the documents of `ds`.
///
/// Query atoms are all `(document, polarity)` pairs. Groundings made true by
/// the evidence are dropped (and counted per rule); false evidence literals
/// are removed from the surviving clauses. Identical hard clauses are merged,
/// and the per-document exactly-one constraint is always present.
pub fn ground(rules: &RuleSet, fs: &FactSet, ds: &Dataset) -> Result<GroundNetwork, MlnError> {
    let documents: Vec<DocumentId> = ds.documents().iter().map(|d| d.id.clone()).collect();
    let doc_ix: HashMap<&DocumentId, usize> = documents.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let tool_ix: HashMap<&ToolId, usize> = ds.tools().iter().enumerate().map(|(i, t)| (t, i)).collect();
    let ev = collect_evidence(fs, &doc_ix, &tool_ix);

    let mut net = GroundNetwork {
        documents: documents.clone(),
        evidence: ev.atoms.clone(),
        rules: Vec::new(),
        clauses: Vec::new(),
        rule_clauses: Vec::new(),
        trivially_true: Vec::new(),
    };
    let mut hard_seen: HashMap<Vec<Lit>, usize> = HashMap::new();

    for rule in rules.rules() {
        let r = net.rules.len();
        net.rules.push(RuleInfo {
            name: rule.name().to_string(),
            weight: rule.weight(),
        });
        net.rule_clauses.push(Vec::new());
        net.trivially_true.push(0);

        let compiled = compile(rule, &doc_ix, &tool_ix)?;
        let n_docs = documents.len();
        let bindings = enumerate_bindings(&compiled, &ev, n_docs);
        // groundings never materialized have a false evidence literal in the body
        let total = u32::try_from(compiled.n_vars)
            .ok()
            .and_then(|v| n_docs.checked_pow(v))
            .unwrap_or(usize::MAX);
        net.trivially_true[r] = total.saturating_sub(bindings.len());
        for binding in bindings {
            match instantiate_clause(&compiled, &binding, &ev) {
                Grounded::Tautology => net.trivially_true[r] += 1,
                Grounded::Empty => {
                    if rule.is_hard() {
                        return Err(MlnError::Unsatisfiable(rule.name().to_string()));
                    }
                    // never satisfiable: contributes nothing to n_i in any world
                }
                Grounded::Clause(literals) => push_clause(&mut net, &mut hard_seen, r, literals, rule.weight()),
            }
        }
    }

    // exactly-one per document, merged with any equivalent rule groundings
    let mut structural = Vec::new();
    for d in 0..documents.len() {
        let atom = |p: Polarity| d * 3 + p.index();
        for (i, p) in Polarity::ALL.iter().enumerate() {
            for q in &Polarity::ALL[i + 1..] {
                structural.push(vec![Lit::new(atom(*p), false), Lit::new(atom(*q), false)]);
            }
        }
        structural.push(Polarity::ALL.iter().map(|&p| Lit::new(atom(p), true)).collect());
    }
    let missing: Vec<_> = structural.into_iter().filter(|c| !hard_seen.contains_key(&sorted(c))).collect();
    if !missing.is_empty() {
        let r = net.rules.len();
        net.rules.push(RuleInfo {
            name: EXACTLY_ONE.to_string(),
            weight: RuleWeight::Hard,
        });
        net.rule_clauses.push(Vec::new());
        net.trivially_true.push(0);
        for c in missing {
            push_clause(&mut net, &mut hard_seen, r, c, RuleWeight::Hard);
        }
    }
    Ok(net)
}

fn sorted(lits: &[Lit]) -> Vec<Lit> {
    let mut key = lits.to_vec();
    key.sort_unstable();
    key
}

fn push_clause(net: &mut GroundNetwork, hard_seen: &mut HashMap<Vec<Lit>, usize>, rule: usize, literals: Vec<Lit>, weight: RuleWeight) {
    if weight.is_hard() {
        let key = sorted(&literals);
        if let Some(&existing) = hard_seen.get(&key) {
            net.rule_clauses[rule].push(existing);
            return;
        }
        hard_seen.insert(key, net.clauses.len());
    }
    net.rule_clauses[rule].push(net.clauses.len());
    net.clauses.push(GroundClause { literals, weight, rule });
}

#[derive(Clone, Copy)]
enum Slot {
    Var(usize),
    Doc(usize),
}

enum CompiledPattern {
    Polarity(Polarity, Slot),
    Label(usize, Polarity, Slot),
    SameAs(Slot, Slot),
}

struct CompiledRule {
    n_vars: usize,
    // clause literals: (pattern, sign in the clause)
    literals: Vec<(CompiledPattern, bool)>,
}

fn compile(rule: &RuleTemplate, doc_ix: &HashMap<&DocumentId, usize>, tool_ix: &HashMap<&ToolId, usize>) -> Result<CompiledRule, MlnError> {
    let vars = rule.variables();
    let slot = |t: &Term| -> Result<Slot, MlnError> {
        match t {
            Term::Variable(v) => Ok(Slot::Var(vars.iter().position(|x| x == v).expect("collected"))),
            Term::Constant(c) => doc_ix.get(c).map(|&d| Slot::Doc(d)).ok_or_else(|| MlnError::UnknownDocument {
                rule: rule.name().to_string(),
                doc: c.to_string(),
            }),
        }
    };
    let mut literals = Vec::new();
    for lit in rule.to_clause().literals {
        let compiled = match &lit.pattern {
            Pattern::Polarity { polarity, doc } => CompiledPattern::Polarity(*polarity, slot(doc)?),
            Pattern::Label { tool, polarity, doc } => {
                let t = *tool_ix.get(tool).ok_or_else(|| MlnError::UnknownTool {
                    rule: rule.name().to_string(),
                    tool: tool.to_string(),
                })?;
                CompiledPattern::Label(t, *polarity, slot(doc)?)
            }
            Pattern::SameAs(a, b) => CompiledPattern::SameAs(slot(a)?, slot(b)?),
        };
        literals.push((compiled, lit.positive));
    }
    Ok(CompiledRule {
        n_vars: vars.len(),
        literals,
    })
}

type Binding = Vec<Option<usize>>;

fn unify(binding: &mut Binding, slot: Slot, value: usize) -> bool {
    match slot {
        Slot::Doc(d) => d == value,
        Slot::Var(v) => match binding[v] {
            Some(bound) => bound == value,
            None => {
                binding[v] = Some(value);
                true
            }
        },
    }
}

/// Substitutions worth materializing: joins over the evidence atoms that
/// appear negated in the clause (positively in the rule body), then a
/// cartesian product over the documents for the remaining variables.
fn enumerate_bindings(rule: &CompiledRule, ev: &Evidence, n_docs: usize) -> Vec<Vec<usize>> {
    let mut bindings: Vec<Binding> = vec![vec![None; rule.n_vars]];
    for (pattern, sign) in &rule.literals {
        if *sign {
            continue;
        }
        let mut next = Vec::new();
        match pattern {
            CompiledPattern::Label(t, p, s) => {
                let docs = ev.labels_by.get(&(*t, *p)).map(Vec::as_slice).unwrap_or(&[]);
                for b in &bindings {
                    for &d in docs {
                        let mut nb = b.clone();
                        if unify(&mut nb, *s, d) {
                            next.push(nb);
                        }
                    }
                }
            }
            CompiledPattern::SameAs(sa, sb) => {
                for b in &bindings {
                    for &(x, y) in &ev.pairs {
                        let mut nb = b.clone();
                        if unify(&mut nb, *sa, x) && unify(&mut nb, *sb, y) {
                            next.push(nb);
                        }
                    }
                }
            }
            CompiledPattern::Polarity(..) => continue,
        }
        bindings = next;
    }
    let mut out = Vec::new();
    for b in bindings {
        let free: Vec<usize> = (0..rule.n_vars).filter(|&v| b[v].is_none()).collect();
        let mut full: Vec<usize> = b.iter().map(|x| x.unwrap_or(0)).collect();
        if free.is_empty() {
            out.push(full);
            continue;
        }
        if n_docs == 0 {
            continue;
        }
        // odometer over the free variables
        let mut digits = vec![0usize; free.len()];
        loop {
            for (k, &v) in free.iter().enumerate() {
                full[v] = digits[k];
            }
            out.push(full.clone());
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < n_docs {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
    }
    out
}

enum Grounded {
    Tautology,
    Empty,
    Clause(Vec<Lit>),
}

fn instantiate_clause(rule: &CompiledRule, binding: &[usize], ev: &Evidence) -> Grounded {
    let resolve = |s: Slot| match s {
        Slot::Var(v) => binding[v],
        Slot::Doc(d) => d,
    };
    let mut lits: Vec<Lit> = Vec::with_capacity(rule.literals.len());
    for (pattern, sign) in &rule.literals {
        let truth = match pattern {
            CompiledPattern::Polarity(p, s) => {
                let lit = Lit::new(resolve(*s) * 3 + p.index(), *sign);
                if lits.contains(&lit.negated()) {
                    return Grounded::Tautology;
                }
                if !lits.contains(&lit) {
                    lits.push(lit);
                }
                continue;
            }
            CompiledPattern::Label(t, p, s) => ev.labels.contains(&(*t, *p, resolve(*s))),
            CompiledPattern::SameAs(a, b) => ev.same_as.contains(&(resolve(*a), resolve(*b))),
        };
        if truth == *sign {
            return Grounded::Tautology;
        }
    }
    if lits.is_empty() {
        Grounded::Empty
    } else {
        Grounded::Clause(lits)
    }
}
