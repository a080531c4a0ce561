//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha20Rng` created from a 64-bit
//! seed. Sub-streams (one per shot batch, bootstrap resample, depth, ...) get
//! their seed from [`derive_seed`], a SplitMix64 finaliser over the parent seed
//! and the stream index, so runs never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Mixes a parent seed with a stream index into an independent child seed.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    let mut z = parent
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
