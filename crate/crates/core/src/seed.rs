//! Seed handling. Every random decision in the crate flows from a `u64` seed
//! through [`rng`], and independent streams are split off with [`derive`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent seed for a named sub-stream, e.g. `derive(seed, "fold-3")`.
pub fn derive(seed: u64, stream: &str) -> u64 {
    splitmix64(seed ^ crate::corpus::fnv1a64(stream.as_bytes()))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
