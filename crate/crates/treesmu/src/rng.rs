//! Deterministic random-stream derivation.
//!
//! Everything stochastic in this crate draws from a ChaCha8 stream derived
//! from a master seed plus a list of integer tags (slot indices, epoch
//! numbers, purpose codes). Deriving independent streams instead of sharing
//! one sequential generator keeps results identical regardless of evaluation
//! order, which is what lets the dataset generator run its slots in parallel
//! and still produce byte-identical files.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for the major stream families, so call sites don't collide
/// by accident. Extend freely; values must never change once used.
pub mod tag {
    pub const GEN_SLOT: u64 = 0x01;
    pub const ORACLE: u64 = 0x02;
    pub const SPLIT: u64 = 0x03;
    pub const INIT: u64 = 0x04;
    pub const SHUFFLE: u64 = 0x05;
    pub const DROPOUT: u64 = 0x06;
    pub const SUBSAMPLE: u64 = 0x07;
    pub const COMPLETION: u64 = 0x08;
    pub const EMBED_POOL: u64 = 0x09;
    pub const CANDIDATES: u64 = 0x0a;
}

/// SplitMix64 finalizer; good avalanche, cheap, stable.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a list of tags into a single 64-bit stream key.
pub fn stream_key(seed: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(seed ^ 0x5DEECE66D);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t));
    }
    state
}

/// Derive an independent ChaCha8 stream from `seed` and `tags`.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, tags))
}

/// FNV-1a hash of a byte string; used to key content-addressed streams
/// (e.g. the numeric oracle seeds itself from the equation text so a
/// verdict does not depend on when or where it is recomputed).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
