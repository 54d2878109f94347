//! MC-SAT slice sampling. SampleSat finds the initial world; each slice
//! update is a Metropolis walk over the solutions of the selected clauses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sampler::{samplesat, solution_walk, SamplerConfig, SatState};
use super::{GroundNetwork, Lit, Marginals, MlnError, TrainingAssignment, WeightVector};

// fresh SampleSat attempts for the initial world
const RETRIES: usize = 10;
// annealing proposals per query atom in each slice update
const WALK_SWEEPS: usize = 3;

/// Sample averages from one MC-SAT run.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleStatistics {
    pub samples: usize,
    /// Frequency of each query atom being true.
    pub atom_probs: Vec<f64>,
    /// Mean satisfied-grounding count per rule index (zero for hard rules
    /// or when counts were not requested).
    pub count_mean: Vec<f64>,
    pub count_var: Vec<f64>,
}

#[derive(Default)]
struct ChainTotals {
    samples: u64,
    atoms: Vec<u64>,
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

fn chain_rng(seed: u64, stream: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream << 16 | chain as u64);
    rng
}

struct Problem<'a> {
    net: &'a GroundNetwork,
    weights: &'a [f64],
    units: Vec<Lit>,
    soft: Vec<usize>,
    with_counts: bool,
}

impl Problem<'_> {
    fn fill_fixed(&self, state: &mut SatState) {
        state.reset(self.net.num_query_atoms());
        for c in self.net.hard_clauses() {
            state.push_clause(&c.literals);
        }
        for u in &self.units {
            state.push_clause(std::slice::from_ref(u));
        }
    }

    fn draw<R: Rng>(&self, state: &mut SatState, cfg: &SamplerConfig, rng: &mut R) -> Option<Vec<bool>> {
        for _ in 0..RETRIES {
            let out = samplesat(state, cfg, rng);
            if out.satisfied {
                return Some(out.world.into_inner());
            }
        }
        None
    }

    fn run_chain(&self, cfg: &SamplerConfig, samples: usize, mut rng: ChaCha8Rng) -> Result<ChainTotals, MlnError> {
        let n = self.net.num_query_atoms();
        let mut state = SatState::new(n);
        self.fill_fixed(&mut state);
        state.set_world(&vec![false; n]);
        let mut x = self
            .draw(&mut state, cfg, &mut rng)
            .ok_or(MlnError::SampleSatFailed { flips: cfg.flip_budget(n) })?;

        let n_rules = self.net.rules().len();
        let mut totals = ChainTotals {
            samples: 0,
            atoms: vec![0; n],
            sum: vec![0; n_rules],
            sum_sq: vec![0; n_rules],
        };
        for step in 0..cfg.burn_in + samples {
            self.fill_fixed(&mut state);
            for c in self.net.soft_clauses() {
                let w = self.weights[c.rule];
                if w > 0.0 {
                    if c.is_satisfied(&x) && rng.gen::<f64>() < -(-w).exp_m1() {
                        state.push_clause(&c.literals);
                    }
                } else if w < 0.0 && !c.is_satisfied(&x) && rng.gen::<f64>() < -w.exp_m1() {
                    // a negative-weight clause is a positive-weight conjunction
                    // of the negated literals
                    for l in &c.literals {
                        state.push_clause(&[l.negated()]);
                    }
                }
            }
            // x satisfies every selected clause, so the walk starts inside
            // the slice
            state.set_world(&x);
            solution_walk(&mut state, WALK_SWEEPS * n, cfg.sa_temperature, cfg.flip_budget(n), &mut rng);
            x.copy_from_slice(state.world());
            if !self.net.satisfies_hard(&x) {
                return Err(MlnError::HardViolation);
            }
            if step < cfg.burn_in {
                continue;
            }
            totals.samples += 1;
            for (a, &v) in x.iter().enumerate() {
                totals.atoms[a] += v as u64;
            }
            if self.with_counts {
                let counts = self.net.rule_counts(&x);
                for &r in &self.soft {
                    let c = counts[r] as u64;
                    totals.sum[r] += c;
                    totals.sum_sq[r] += c * c;
                }
            }
        }
        Ok(totals)
    }
}

fn run(
    net: &GroundNetwork,
    dense: &[f64],
    cfg: &SamplerConfig,
    clamp: Option<&TrainingAssignment>,
    stream: u64,
    with_counts: bool,
) -> Result<SampleStatistics, MlnError> {
    cfg.validate()?;
    let units = clamp.map(TrainingAssignment::units).unwrap_or_default();
    let problem = Problem {
        net,
        weights: dense,
        units,
        soft: net.soft_rule_indices(),
        with_counts,
    };
    let per_chain = cfg.num_samples / cfg.chains;
    let extra = cfg.num_samples % cfg.chains;
    let chains: Vec<ChainTotals> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let samples = per_chain + usize::from(c < extra);
            problem.run_chain(cfg, samples, chain_rng(cfg.seed, stream, c))
        })
        .collect::<Result<_, _>>()?;

    let n = net.num_query_atoms();
    let n_rules = net.rules().len();
    let mut merged = ChainTotals {
        samples: 0,
        atoms: vec![0; n],
        sum: vec![0; n_rules],
        sum_sq: vec![0; n_rules],
    };
    for t in &chains {
        merged.samples += t.samples;
        for (m, v) in merged.atoms.iter_mut().zip(&t.atoms) {
            *m += v;
        }
        for r in 0..n_rules {
            merged.sum[r] += t.sum[r];
            merged.sum_sq[r] += t.sum_sq[r];
        }
    }
    let s = merged.samples.max(1);
    let sf = s as f64;
    let atom_probs = merged.atoms.iter().map(|&k| k as f64 / sf).collect();
    let count_mean = merged.sum.iter().map(|&k| k as f64 / sf).collect();
    // exact integer arithmetic until the final division
    let count_var = (0..n_rules)
        .map(|r| {
            let num = s as i128 * merged.sum_sq[r] as i128 - (merged.sum[r] as i128).pow(2);
            num.max(0) as f64 / (sf * sf)
        })
        .collect();
    Ok(SampleStatistics {
        samples: merged.samples as usize,
        atom_probs,
        count_mean,
        count_var,
    })
}

/// Atom frequencies and rule-count moments from MC-SAT under `dense`
/// weights (indexed like the network's rules). Observed atoms of `clamp` are
/// fixed as hard unit clauses. `stream` separates the random streams of
/// different calls sharing one seed.
pub fn mcsat_sample_statistics(
    net: &GroundNetwork,
    dense: &[f64],
    cfg: &SamplerConfig,
    clamp: Option<&TrainingAssignment>,
    stream: u64,
) -> Result<SampleStatistics, MlnError> {
    run(net, dense, cfg, clamp, stream, true)
}

/// Marginals estimated by MC-SAT; a pure function of its arguments.
pub fn mcsat_marginals(net: &GroundNetwork, weights: &WeightVector, cfg: &SamplerConfig) -> Result<Marginals, MlnError> {
    let stats = run(net, &net.dense_weights(weights), cfg, None, 0, false)?;
    Ok(Marginals::from_atom_probabilities(net.documents(), &stats.atom_probs))
}
