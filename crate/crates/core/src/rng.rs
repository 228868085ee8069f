//! Counter-based random streams.
//!
//! Every shot owns an independent ChaCha8 stream selected by the shot index,
//! and draws a fixed number of words per noise site in site order. A shot's
//! randomness is therefore a pure function of `(seed, shot, site)` and does
//! not depend on how shots are distributed across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Uniform in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// SplitMix64 finalizer, used to derive sub-seeds from structured keys.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}
