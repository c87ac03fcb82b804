//! Seed derivation for deterministic, parallelism-independent Monte Carlo.
//!
//! Every concurrent unit of work (trial, batch, form, lattice) draws from its
//! own ChaCha8 stream seeded by a splitmix64 mix of the master seed and the
//! unit index. Results are collected in index order, so statistics and output
//! files are bit-identical no matter how many worker threads ran.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed mixing function of (master_seed, index) used for per-unit seeds.
#[inline]
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    mix(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// The crate-wide deterministic generator.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
