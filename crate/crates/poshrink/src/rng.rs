//! Seeded, counter-based random number streams.
//!
//! Monte Carlo work is split into fixed-size blocks; block `k` of a run draws
//! from `substream(seed, k)`. Results are therefore independent of how blocks
//! are scheduled across worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for substream `index` of the run keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer; used to fold structured keys (prior hash, lattice
/// point, durations) into a single substream seed.
pub fn mix(mut state: u64, value: u64) -> u64 {
    state = state
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(value);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a slice of u64 keys into one seed.
pub fn mix_all(seed: u64, values: &[u64]) -> u64 {
    values.iter().fold(seed, |acc, &v| mix(acc, v))
}
