//! Deterministic derivation of independent random streams.
//!
//! Every source of randomness in a run flows from a single master seed.
//! Sub-streams are labelled by a tag path (stream kind, generation, slot,
//! attempt, ...) so that results do not depend on scheduling or on the
//! number of worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INIT_POPULATION: u64 = 0x11;
pub const INIT_EVAL: u64 = 0x12;
pub const SLOT: u64 = 0x13;
pub const EVAL: u64 = 0x14;
pub const REPLICATE: u64 = 0x15;
pub const VERIFY: u64 = 0x16;
pub const EXTERNAL_SPLIT: u64 = 0x17;
pub const EXTERNAL_GA: u64 = 0x18;
pub const EXTERNAL_CHOICE: u64 = 0x19;

// SplitMix64 finalizer; full-avalanche mixing of a 64-bit word.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a tag path.
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master);
    for &t in tags {
        state = mix(state ^ mix(t));
    }
    state
}

/// A ChaCha stream for the given tag path under the master seed.
pub fn rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, tags))
}
