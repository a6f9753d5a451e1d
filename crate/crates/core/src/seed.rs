//! Deterministic seed derivation.
//!
//! Every random stream is keyed by a tuple of integers so that results do not
//! depend on scheduling order or on how many draws other streams consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a key tuple.
pub fn derive(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &p| mix64(acc ^ mix64(p)))
}

/// Seed of one Monte-Carlo run.
pub fn run_seed(master: u64, run_index: u64) -> u64 {
    derive(&[master, run_index])
}

/// Stream domains, kept distinct so that e.g. sensing noise does not shift
/// when swarm parameters change.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Stream {
    Events = 1,
    Sensing = 2,
    Spawn = 3,
    Boid = 4,
}

pub fn stream(run_seed: u64, domain: Stream, key: &[u64]) -> ChaCha8Rng {
    let mut parts = Vec::with_capacity(key.len() + 2);
    parts.push(run_seed);
    parts.push(domain as u64);
    parts.extend_from_slice(key);
    ChaCha8Rng::seed_from_u64(derive(&parts))
}
