use std::fmt::Write;

use super::{GroundNetwork, WeightVector};

/// Text rendering of a ground network: evidence atoms as `#` comments, then
/// one clause per line as `<weight|H> : [-]atom ...`.
pub fn dump_network(net: &GroundNetwork, weights: &WeightVector) -> String {
    let dense = net.dense_weights(weights);
    let mut out = String::new();
    for e in net.evidence() {
        writeln!(out, "# evidence {e}").unwrap();
    }
    for c in net.clauses() {
        if c.is_hard() {
            out.push('H');
        } else {
            write!(out, "{}", dense[c.rule]).unwrap();
        }
        out.push_str(" :");
        for l in &c.literals {
            out.push(' ');
            if !l.positive {
                out.push('-');
            }
            write!(out, "{}", net.query_atom(l.atom)).unwrap();
        }
        out.push('\n');
    }
    out
}
