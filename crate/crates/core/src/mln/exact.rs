//! Brute-force inference by enumerating every hard-consistent world.
//!
//! Worlds are packed into a `u64`, so the cap can never exceed 63 atoms.
//! Per-world rule counts are cached once, after which moments under any
//! weight vector (optionally conditioned on clamped atoms) are a single pass.

use super::{GroundNetwork, Marginals, MlnError, TrainingAssignment, WeightVector};

/// Default limit on query atoms for exact inference (10 documents).
pub const DEFAULT_ORACLE_CAP: usize = 30;
pub const MAX_ORACLE_CAP: usize = 63;

/// Distribution summaries under one weight vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    /// Log partition function over the worlds considered.
    pub log_z: f64,
    /// `E[n_i]` per rule index of the network; zero for hard rules.
    pub mean: Vec<f64>,
    /// `Var[n_i]` per rule index; zero for hard rules.
    pub var: Vec<f64>,
    /// Marginal probability per query atom.
    pub atom_probs: Vec<f64>,
}

/// Enumerated hard-consistent worlds of one network.
#[derive(Clone, Debug)]
pub struct ExactOracle {
    num_atoms: usize,
    soft: Vec<usize>,
    num_rules: usize,
    worlds: Vec<u64>,
    // counts[w * soft.len() + k] = n_{soft[k]}(world w)
    counts: Vec<u32>,
}

fn unpack(bits: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

impl ExactOracle {
    pub fn new(net: &GroundNetwork, cap: usize) -> Result<Self, MlnError> {
        let n = net.num_query_atoms();
        let cap = cap.min(MAX_ORACLE_CAP);
        if n > cap {
            return Err(MlnError::OverCap { atoms: n, cap });
        }

        // each hard clause is checked once its highest atom is assigned
        let mut by_max: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
        for c in net.hard_clauses() {
            let mut mask = 0u64;
            let mut want = 0u64;
            for l in &c.literals {
                mask |= 1 << l.atom;
                if l.positive {
                    want |= 1 << l.atom;
                }
            }
            let top = c.literals.iter().map(|l| l.atom).max().expect("non-empty clause");
            by_max[top].push((mask, want));
        }

        let mut worlds = Vec::new();
        if n == 0 {
            worlds.push(0);
        } else {
            // iterative DFS; stack holds (depth, partial world)
            let mut stack = vec![(0usize, 0u64)];
            while let Some((depth, bits)) = stack.pop() {
                for v in [1u64, 0] {
                    let next = bits | v << depth;
                    // clause satisfied iff some literal agrees: (next ^ !want) & mask != 0
                    let ok = by_max[depth].iter().all(|&(mask, want)| (!(next ^ want)) & mask != 0);
                    if !ok {
                        continue;
                    }
                    if depth + 1 == n {
                        worlds.push(next);
                    } else {
                        stack.push((depth + 1, next));
                    }
                }
            }
            worlds.sort_unstable();
        }

        let soft = net.soft_rule_indices();
        let mut counts = Vec::with_capacity(worlds.len() * soft.len());
        for &w in &worlds {
            let world = unpack(w, n);
            let all = net.rule_counts(&world);
            counts.extend(soft.iter().map(|&r| all[r] as u32));
        }
        Ok(ExactOracle {
            num_atoms: n,
            soft,
            num_rules: net.rules().len(),
            worlds,
            counts,
        })
    }

    pub fn num_worlds(&self) -> usize {
        self.worlds.len()
    }

    /// Moments under `dense` weights (one per rule index, see
    /// [`GroundNetwork::dense_weights`]), restricted to worlds agreeing with
    /// every observed atom of `clamp`.
    pub fn moments(&self, dense: &[f64], clamp: Option<&TrainingAssignment>) -> Result<Moments, MlnError> {
        let (mask, want) = match clamp {
            Some(t) => t.masks(),
            None => (0, 0),
        };
        let k = self.soft.len();
        let w: Vec<f64> = self.soft.iter().map(|&r| dense[r]).collect();
        let selected: Vec<usize> = (0..self.worlds.len()).filter(|&i| self.worlds[i] & mask == want & mask).collect();
        if selected.is_empty() {
            return Err(MlnError::InfeasibleTraining);
        }
        let log_w: Vec<f64> = selected
            .iter()
            .map(|&i| {
                let row = &self.counts[i * k..(i + 1) * k];
                row.iter().zip(&w).map(|(&c, &wi)| wi * c as f64).sum()
            })
            .collect();
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let probs: Vec<f64> = log_w.iter().map(|lw| (lw - max).exp()).collect();
        let z: f64 = probs.iter().sum();
        let log_z = max + z.ln();

        let mut mean_soft = vec![0.0; k];
        let mut atom_probs = vec![0.0; self.num_atoms];
        for (&i, &p) in selected.iter().zip(&probs) {
            let p = p / z;
            for (m, &c) in mean_soft.iter_mut().zip(&self.counts[i * k..(i + 1) * k]) {
                *m += p * c as f64;
            }
            let bits = self.worlds[i];
            for (a, prob) in atom_probs.iter_mut().enumerate() {
                if bits >> a & 1 == 1 {
                    *prob += p;
                }
            }
        }
        let mut var_soft = vec![0.0; k];
        for (&i, &p) in selected.iter().zip(&probs) {
            let p = p / z;
            for ((v, &c), m) in var_soft.iter_mut().zip(&self.counts[i * k..(i + 1) * k]).zip(&mean_soft) {
                let d = c as f64 - m;
                *v += p * d * d;
            }
        }

        let mut mean = vec![0.0; self.num_rules];
        let mut var = vec![0.0; self.num_rules];
        for (j, &r) in self.soft.iter().enumerate() {
            mean[r] = mean_soft[j];
            var[r] = var_soft[j];
        }
        Ok(Moments {
            log_z,
            mean,
            var,
            atom_probs,
        })
    }
}

/// Exact marginals of every query atom, using [`DEFAULT_ORACLE_CAP`].
pub fn exact_marginals(net: &GroundNetwork, weights: &WeightVector) -> Result<Marginals, MlnError> {
    let oracle = ExactOracle::new(net, DEFAULT_ORACLE_CAP)?;
    let m = oracle.moments(&net.dense_weights(weights), None)?;
    Ok(Marginals::from_atom_probabilities(net.documents(), &m.atom_probs))
}

/// Exact conditional log-likelihood `log P(observed atoms | evidence)`.
pub fn exact_cll(net: &GroundNetwork, weights: &WeightVector, training: &TrainingAssignment) -> Result<f64, MlnError> {
    let oracle = ExactOracle::new(net, DEFAULT_ORACLE_CAP)?;
    let dense = net.dense_weights(weights);
    let all = oracle.moments(&dense, None)?;
    let obs = oracle.moments(&dense, Some(training))?;
    Ok(obs.log_z - all.log_z)
}
