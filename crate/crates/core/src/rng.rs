//! Deterministic random streams.
//!
//! All randomness in a run flows from one global seed through named
//! substreams, so any component can be replayed in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche, stable across platforms.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn tag_hash(tag: &str) -> u64 {
    // FNV-1a over the tag bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A reproducible stream derived from `(seed, tag)`.
pub fn substream(seed: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed ^ tag_hash(tag)))
}

/// A reproducible stream derived from `(seed, tag, index)`, for families of
/// streams such as per-episode generators.
pub fn substream_n(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(seed ^ tag_hash(tag)) ^ index))
}

/// Derives a plain `u64` seed for handing to components that seed themselves.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    mix(mix(seed ^ tag_hash(tag)) ^ index)
}
