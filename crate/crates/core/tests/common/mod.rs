#![allow(dead_code)]

use polarity_core::harness::{generate, ClusterSize, GenSpec};
use polarity_core::kb::{FactSet, Polarity};
use polarity_core::mln::{ground, GroundNetwork, TrainingAssignment, WeightVector};
use polarity_core::rules::generate_default_rules;
use polarity_core::saturation::instantiate;
use polarity_core::{Dataset, DocumentId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn id(s: &str) -> DocumentId {
    DocumentId::new(s).unwrap()
}

pub struct Instance {
    pub ds: Dataset,
    pub net: GroundNetwork,
    pub weights: WeightVector,
}

/// Generated dataset of at most `max_docs` documents, default rules, and
/// weights drawn from [-1, 2.5].
pub fn random_instance(seed: u64, max_docs: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tools = rng.gen_range(1..=3);
    let accs: Vec<f64> = (0..n_tools).map(|_| rng.gen_range(0.3..1.0)).collect();
    let size_max = rng.gen_range(1..=max_docs.min(3));
    let n_clusters = rng.gen_range(1..=(max_docs / size_max).max(1));
    let ds = generate(&GenSpec::new(n_clusters, ClusterSize::Range(1, size_max), &accs, rng.gen())).unwrap();
    assert!(ds.documents().len() <= max_docs);
    let rules = generate_default_rules(ds.tools(), 1.0).unwrap();
    let net = ground(&rules, &instantiate(&ds), &ds.without_gold()).unwrap();
    let mut weights = WeightVector::new();
    for (name, _) in net.initial_weights().iter() {
        weights.set(name, rng.gen_range(-1.0..2.5));
    }
    Instance { ds, net, weights }
}

/// A feasible partial assignment: each document is left open, fixed to one
/// polarity, or has one polarity ruled out.
pub fn random_training(net: &GroundNetwork, seed: u64) -> TrainingAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut values = vec![None; net.num_query_atoms()];
    for d in 0..net.documents().len() {
        let p = Polarity::ALL[rng.gen_range(0..3)];
        match rng.gen_range(0..3) {
            0 => {}
            1 => {
                for q in Polarity::ALL {
                    values[net.atom_index(d, q)] = Some(q == p);
                }
            }
            _ => values[net.atom_index(d, p)] = Some(false),
        }
    }
    TrainingAssignment::new(values)
}

pub fn literal_set(fs: &FactSet) -> Vec<String> {
    fs.literals().map(|l| l.to_string()).collect()
}
