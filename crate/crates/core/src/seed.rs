//! Deterministic seed derivation.
//!
//! Every stream of randomness in a run is keyed by a path of integers
//! (base seed, cell coordinates, realization index). Derivation is a pure
//! function of that path, so results never depend on the order in which
//! parallel workers pick up tasks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every stochastic component.
pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a path of keys.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(base), |acc, &k| {
        mix64(acc.wrapping_add(GOLDEN) ^ mix64(k.wrapping_add(GOLDEN)))
    })
}

/// Seed for realization `k` of a protocol run keyed by `base`.
pub fn realization_seed(base: u64, k: u64) -> u64 {
    base ^ k
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
