use super::exact::ExactOracle;
use super::mcsat::mcsat_sample_statistics;
use super::sampler::SamplerConfig;
use super::{GroundNetwork, Marginals, MlnError, WeightVector};

/// Marginals computed per independent component: exactly when the
/// component has at most `cap` query atoms, otherwise by MC-SAT.
pub fn infer_marginals(net: &GroundNetwork, weights: &WeightVector, cap: usize, sampler: &SamplerConfig) -> Result<Marginals, MlnError> {
    sampler.validate()?;
    let dense = net.dense_weights(weights);
    let mut probs = vec![0.0; net.num_query_atoms()];
    for (k, part) in net.components().iter().enumerate() {
        let local = if part.network.num_query_atoms() <= cap {
            ExactOracle::new(&part.network, cap)?.moments(&dense, None)?.atom_probs
        } else {
            mcsat_sample_statistics(&part.network, &dense, sampler, None, k as u64)?.atom_probs
        };
        for (i, &d) in part.documents.iter().enumerate() {
            probs[d * 3..d * 3 + 3].copy_from_slice(&local[i * 3..i * 3 + 3]);
        }
    }
    Ok(Marginals::from_atom_probabilities(net.documents(), &probs))
}
