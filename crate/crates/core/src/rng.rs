//! Deterministic random streams.
//!
//! Every random quantity in the crate comes from a ChaCha20 generator keyed by
//! a 64-bit seed, with the stream selected by hashing a fixed label. Draws are
//! built from raw `u64`s so values do not depend on `rand` distribution code.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// FNV-1a over the label bytes; picks the ChaCha stream id.
fn label_to_stream(label: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// A labelled substream of a seeded generator.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha20Rng,
}

impl Stream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(label_to_stream(label));
        Self { inner }
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [-1, 1).
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
