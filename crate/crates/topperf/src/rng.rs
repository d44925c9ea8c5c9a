//! Deterministic RNG stream derivation.
//!
//! Every random decision in the pipeline draws from a stream keyed by
//! (global seed, entity id, period, purpose). Scheduling and thread count
//! therefore cannot change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PURPOSE_DISCIPLINE_TIE: u64 = 0x11;
pub const PURPOSE_AUTHOR_GEN: u64 = 0x22;
pub const PURPOSE_LABEL: u64 = 0x33;
pub const PURPOSE_POOL: u64 = 0x44;
pub const PURPOSE_PUBS: u64 = 0x55;

/// FNV-1a over bytes. Stable across platforms and releases, unlike
/// `std::hash::DefaultHasher`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derived stream key for (seed, id, period, purpose).
pub fn stream_key(seed: u64, id: &str, period_index: usize, purpose: u64) -> u64 {
    let mut k = splitmix64(seed ^ fnv1a64(id.as_bytes()));
    k = splitmix64(k ^ (period_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    splitmix64(k ^ purpose)
}

pub fn stream(seed: u64, id: &str, period_index: usize, purpose: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, id, period_index, purpose))
}

/// Stream for a numerically indexed entity (e.g. synthetic author i).
pub fn indexed_stream(seed: u64, index: u64, purpose: u64) -> ChaCha8Rng {
    let k = splitmix64(splitmix64(seed ^ index.wrapping_mul(0xff51_afd7_ed55_8ccd)) ^ purpose);
    ChaCha8Rng::seed_from_u64(k)
}
