//! Seeded, portable randomness.
//!
//! Every random draw in this crate flows through a ChaCha8 stream created
//! here, and the mapping from raw stream output to draws is pinned below, so
//! seeded outputs are identical across platforms and releases.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

pub(crate) fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent sub-seed for a named purpose: the first eight
/// bytes (little endian) of `SHA-256(label ‖ base_le)`.
pub(crate) fn derive_seed(base: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(label.as_bytes());
    hasher.update(base.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Uniform in `[0, 1)` with 53 bits of precision.
pub(crate) fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli draw. Always consumes exactly one stream value.
pub(crate) fn chance(rng: &mut ChaCha8Rng, p: f64) -> bool {
    unit_f64(rng) < p
}

/// Uniform integer in `[0, n)` by rejection sampling; `n` must be positive.
pub(crate) fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// Uniform integer in `[lo, hi]` inclusive.
pub(crate) fn between(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    debug_assert!(lo <= hi);
    lo + below(rng, hi - lo + 1)
}

/// Fisher–Yates shuffle, descending index order.
pub(crate) fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}
