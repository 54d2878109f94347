//! WalkSAT and SampleSat over an incremental clause state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Lit, MlnError, World};

/// Parameters for MC-SAT and its SampleSat inner loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Samples kept after burn-in, summed over all chains.
    pub num_samples: usize,
    /// Discarded steps at the start of every chain.
    pub burn_in: usize,
    pub samplesat_sa_prob: f64,
    pub sa_temperature: f64,
    pub walksat_noise: f64,
    /// Flip budget per SampleSat call; `None` means 100 per query atom.
    pub max_flips: Option<usize>,
    pub chains: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            num_samples: 1000,
            burn_in: 100,
            samplesat_sa_prob: 0.5,
            sa_temperature: 0.5,
            walksat_noise: 0.2,
            max_flips: None,
            chains: 3,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), MlnError> {
        let bad = |m: &str| Err(MlnError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.samplesat_sa_prob) {
            return bad("samplesat_sa_prob must lie in [0, 1]");
        }
        if !(self.sa_temperature > 0.0 && self.sa_temperature.is_finite()) {
            return bad("sa_temperature must be positive");
        }
        if !(0.0..=1.0).contains(&self.walksat_noise) {
            return bad("walksat_noise must lie in [0, 1]");
        }
        if self.chains == 0 {
            return bad("chains must be at least 1");
        }
        if self.num_samples == 0 {
            return bad("num_samples must be at least 1");
        }
        if self.max_flips == Some(0) {
            return bad("max_flips must be at least 1");
        }
        Ok(())
    }

    pub fn flip_budget(&self, num_atoms: usize) -> usize {
        self.max_flips.unwrap_or(100 * num_atoms.max(1))
    }
}

const NOT_VIOLATED: u32 = u32::MAX;

/// Clause set plus a world, with per-clause true-literal counts and the list
/// of violated clauses kept current under flips. Clauses and occurrence
/// lists are stored flat so the state can be refilled without reallocating.
#[derive(Clone, Debug, Default)]
pub struct SatState {
    num_atoms: usize,
    clause_start: Vec<usize>,
    lits: Vec<Lit>,
    // occurrences of literal code 2*atom + positive
    occ_start: Vec<usize>,
    occ: Vec<u32>,
    world: Vec<bool>,
    true_count: Vec<u32>,
    violated: Vec<u32>,
    violated_pos: Vec<u32>,
}

#[inline]
fn code(l: Lit) -> usize {
    l.atom * 2 + l.positive as usize
}

impl SatState {
    pub fn new(num_atoms: usize) -> Self {
        let mut s = SatState::default();
        s.reset(num_atoms);
        s
    }

    /// Builds a state over `clauses` with every atom false.
    pub fn from_clauses<'a>(num_atoms: usize, clauses: impl IntoIterator<Item = &'a [Lit]>) -> Self {
        let mut s = SatState::new(num_atoms);
        for c in clauses {
            s.push_clause(c);
        }
        s.set_world(&vec![false; num_atoms]);
        s
    }

    /// Drops all clauses; the world is kept only if the atom count matches.
    pub fn reset(&mut self, num_atoms: usize) {
        self.num_atoms = num_atoms;
        self.clause_start.clear();
        self.clause_start.push(0);
        self.lits.clear();
        self.world.resize(num_atoms, false);
    }

    pub fn push_clause(&mut self, lits: &[Lit]) {
        debug_assert!(lits.iter().all(|l| l.atom < self.num_atoms));
        self.lits.extend_from_slice(lits);
        self.clause_start.push(self.lits.len());
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn num_clauses(&self) -> usize {
        self.clause_start.len() - 1
    }

    pub fn clause(&self, c: usize) -> &[Lit] {
        &self.lits[self.clause_start[c]..self.clause_start[c + 1]]
    }

    pub fn world(&self) -> &[bool] {
        &self.world
    }

    pub fn num_violated(&self) -> usize {
        self.violated.len()
    }

    pub fn is_satisfied(&self) -> bool {
        self.violated.is_empty()
    }

    fn occurrences(&self, l: Lit) -> &[u32] {
        let k = code(l);
        &self.occ[self.occ_start[k]..self.occ_start[k + 1]]
    }

    fn build_occurrences(&mut self) {
        let n_codes = self.num_atoms * 2;
        self.occ_start.clear();
        self.occ_start.resize(n_codes + 1, 0);
        for l in &self.lits {
            self.occ_start[code(*l) + 1] += 1;
        }
        for k in 0..n_codes {
            self.occ_start[k + 1] += self.occ_start[k];
        }
        self.occ.clear();
        self.occ.resize(self.lits.len(), 0);
        let mut fill = self.occ_start.clone();
        for c in 0..self.num_clauses() {
            for i in self.clause_start[c]..self.clause_start[c + 1] {
                let k = code(self.lits[i]);
                self.occ[fill[k]] = c as u32;
                fill[k] += 1;
            }
        }
    }

    /// Installs `world` and recomputes all counts. Must be called after the
    /// last `push_clause` and before any flip.
    pub fn set_world(&mut self, world: &[bool]) {
        assert_eq!(world.len(), self.num_atoms);
        self.world.clear();
        self.world.extend_from_slice(world);
        self.build_occurrences();
        self.recount();
    }

    fn recount(&mut self) {
        let m = self.num_clauses();
        self.true_count.clear();
        self.true_count.resize(m, 0);
        self.violated.clear();
        self.violated_pos.clear();
        self.violated_pos.resize(m, NOT_VIOLATED);
        for c in 0..m {
            let t = self.clause(c).iter().filter(|l| l.holds(&self.world)).count() as u32;
            self.true_count[c] = t;
            if t == 0 {
                self.violated_pos[c] = self.violated.len() as u32;
                self.violated.push(c as u32);
            }
        }
    }

    fn randomize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for v in self.world.iter_mut() {
            *v = rng.gen();
        }
        self.recount();
    }

    fn mark_violated(&mut self, c: usize) {
        self.violated_pos[c] = self.violated.len() as u32;
        self.violated.push(c as u32);
    }

    fn mark_satisfied(&mut self, c: usize) {
        let pos = self.violated_pos[c] as usize;
        let last = *self.violated.last().expect("clause listed as violated");
        self.violated.swap_remove(pos);
        if last as usize != c {
            self.violated_pos[last as usize] = pos as u32;
        }
        self.violated_pos[c] = NOT_VIOLATED;
    }

    /// Flips `atom` and updates counts.
    pub fn flip(&mut self, atom: usize) {
        let was = Lit::new(atom, self.world[atom]);
        self.world[atom] = !self.world[atom];
        for i in self.occ_start[code(was)]..self.occ_start[code(was) + 1] {
            let c = self.occ[i] as usize;
            self.true_count[c] -= 1;
            if self.true_count[c] == 0 {
                self.mark_violated(c);
            }
        }
        let now = was.negated();
        for i in self.occ_start[code(now)]..self.occ_start[code(now) + 1] {
            let c = self.occ[i] as usize;
            self.true_count[c] += 1;
            if self.true_count[c] == 1 {
                self.mark_satisfied(c);
            }
        }
    }

    /// Satisfied clauses that flipping `atom` would violate.
    pub fn break_count(&self, atom: usize) -> usize {
        let cur = Lit::new(atom, self.world[atom]);
        self.occurrences(cur).iter().filter(|&&c| self.true_count[c as usize] == 1).count()
    }

    /// Violated clauses that flipping `atom` would satisfy.
    pub fn make_count(&self, atom: usize) -> usize {
        let other = Lit::new(atom, !self.world[atom]);
        self.occurrences(other)
            .iter()
            .filter(|&&c| self.true_count[c as usize] == 0)
            .count()
    }

    /// Change in the number of violated clauses if `atom` were flipped.
    pub fn delta_cost(&self, atom: usize) -> i64 {
        self.break_count(atom) as i64 - self.make_count(atom) as i64
    }
}

/// One WalkSAT move: picks a violated clause uniformly, then flips either a
/// uniform atom of it (probability `noise`) or one of minimal break count.
/// Returns the flipped atom.
pub fn walksat_step<R: Rng + ?Sized>(state: &mut SatState, noise: f64, rng: &mut R) -> Result<usize, MlnError> {
    if state.violated.is_empty() {
        return Err(MlnError::NoViolatedClause);
    }
    let c = state.violated[rng.gen_range(0..state.violated.len())] as usize;
    let clause = state.clause(c);
    let atom = if rng.gen_bool(noise) {
        clause[rng.gen_range(0..clause.len())].atom
    } else {
        let mut best = usize::MAX;
        let mut ties = 0usize;
        let mut chosen = clause[0].atom;
        for l in clause {
            let b = state.break_count(l.atom);
            if b < best {
                best = b;
                ties = 1;
                chosen = l.atom;
            } else if b == best {
                // reservoir sampling keeps the choice uniform over ties
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    chosen = l.atom;
                }
            }
        }
        chosen
    };
    state.flip(atom);
    Ok(atom)
}

/// One simulated-annealing move on a uniformly random atom. Returns whether
/// the flip was accepted.
pub fn sa_step<R: Rng + ?Sized>(state: &mut SatState, temperature: f64, rng: &mut R) -> bool {
    if state.num_atoms == 0 {
        return false;
    }
    let atom = rng.gen_range(0..state.num_atoms);
    let delta = state.delta_cost(atom);
    let accept = delta <= 0 || rng.gen::<f64>() < (-(delta as f64) / temperature).exp();
    if accept {
        state.flip(atom);
    }
    accept
}

/// Result of one SampleSat call.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSatOutcome {
    /// The first satisfying world found, or the best one seen.
    pub world: World,
    pub satisfied: bool,
    pub flips: usize,
}

/// Samples a world satisfying every clause of `state`, starting from a
/// uniformly random assignment and mixing annealing and WalkSAT moves.
pub fn samplesat<R: Rng + ?Sized>(state: &mut SatState, cfg: &SamplerConfig, rng: &mut R) -> SampleSatOutcome {
    state.randomize(rng);
    let budget = cfg.flip_budget(state.num_atoms);
    let mut best_cost = state.num_violated();
    let mut best = state.world.clone();
    let mut steps = 0;
    while !state.is_satisfied() && steps < budget {
        steps += 1;
        if rng.gen_bool(cfg.samplesat_sa_prob) {
            sa_step(state, cfg.sa_temperature, rng);
        } else {
            walksat_step(state, cfg.walksat_noise, rng).expect("a clause is violated");
        }
        if state.num_violated() < best_cost {
            best_cost = state.num_violated();
            if best_cost > 0 {
                best.copy_from_slice(&state.world);
            }
        }
    }
    if state.is_satisfied() {
        SampleSatOutcome {
            world: World::new(state.world.clone()),
            satisfied: true,
            flips: steps,
        }
    } else {
        SampleSatOutcome {
            world: World::new(best),
            satisfied: false,
            flips: steps,
        }
    }
}

/// Metropolis walk over the solutions of `state`, which must start
/// satisfied. Each of the `moves` annealing proposals is followed by further
/// proposals until every clause holds again; observed only at satisfying
/// worlds the walk is reversible with respect to the uniform distribution
/// over solutions. Returns `false`, restoring the last solution, when a
/// return takes more than `budget` proposals.
pub fn solution_walk<R: Rng + ?Sized>(state: &mut SatState, moves: usize, temperature: f64, budget: usize, rng: &mut R) -> bool {
    debug_assert!(state.is_satisfied());
    let mut last = state.world.clone();
    for _ in 0..moves {
        sa_step(state, temperature, rng);
        let mut spent = 0;
        while !state.is_satisfied() {
            if spent == budget {
                state.set_world(&last);
                return false;
            }
            sa_step(state, temperature, rng);
            spent += 1;
        }
        last.copy_from_slice(&state.world);
    }
    true
}
