//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`SeededRng`], a ChaCha8
//! stream generator seeded from a `u64`. Sub-streams for independent
//! consumers are derived with [`derive_seed`] so that adding a consumer
//! never perturbs the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `(parent, index)`.
///
/// `mix64(mix64(parent) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))`; the
/// multiplier is odd so distinct indices map to distinct pre-images.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}
