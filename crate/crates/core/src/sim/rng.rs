//! Labelled, seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `SHA-256(label || seed)`, so
//! two streams with different labels or seeds never share key material.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

/// Returns the deterministic generator for `(label, seed)`.
///
/// Panics if `label` is empty.
pub fn rng_stream(label: &str, seed: u64) -> SimRng {
    assert!(!label.is_empty(), "rng stream label must be non-empty");
    let mut hasher = Sha256::new();
    hasher.update((label.len() as u64).to_be_bytes());
    hasher.update(label.as_bytes());
    hasher.update(seed.to_be_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}
