//! Seed derivation so that independent work items (trials, frames) get
//! reproducible, uncorrelated streams regardless of how they are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of work item `index` from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix(mix(base) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Seeded generator for work item `index`.
pub fn stream(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, index))
}
