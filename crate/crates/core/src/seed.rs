//! Seed derivation for every random draw in the crate.
//!
//! All generators are `ChaCha8Rng` instances seeded from a tuple of integers
//! (base seed, chain index, row index, ...). Mixing goes through splitmix64 so
//! neighbouring tuples give unrelated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of integers into one 64-bit seed.
pub fn derive(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908u64, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

pub fn rng(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(parts))
}
