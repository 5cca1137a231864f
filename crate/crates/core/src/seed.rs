//! Reproducible per-trial seeds.
//!
//! Every Monte Carlo trial draws from its own generator seeded with
//! `mix64(master, trial_index)`, so a trial's randomness depends only on the
//! master seed and its index, never on scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Golden-ratio increment used to spread consecutive trial indices.
pub const MIX_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `master ^ ((index + 1) * MIX_INCREMENT)`.
///
/// ```
/// use spectral_edge::seed::mix64;
/// assert_eq!(mix64(0, 0), mix64(0, 0));
/// assert_ne!(mix64(1, 0), mix64(1, 1));
/// ```
pub fn mix64(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(MIX_INCREMENT);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn distinct_over_many_indices() {
        let seeds: HashSet<u64> = (0..100_000).map(|i| mix64(42, i)).collect();
        assert_eq!(seeds.len(), 100_000);
    }

    #[test]
    fn frozen_values() {
        // Pinned so that published trial sets stay reproducible across releases.
        assert_eq!(mix64(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(42, 7), mix64(42, 7));
    }
}
