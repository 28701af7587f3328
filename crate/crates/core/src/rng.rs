//! Deterministic random-stream derivation.
//!
//! Every random quantity in an experiment is drawn from a substream keyed by
//! (master seed, drop index, purpose tag), so adding or removing one consumer
//! never perturbs the randomness seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stable 64-bit mix of (master seed, drop index, purpose tag).
pub fn substream_seed(master: u64, drop: u64, tag: &str) -> u64 {
    let mut h = mix(master ^ drop.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for &b in tag.as_bytes() {
        h = mix(h ^ u64::from(b));
    }
    h
}

/// ChaCha stream for one (master seed, drop index, purpose tag) substream.
pub fn substream(master: u64, drop: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, drop, tag))
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
