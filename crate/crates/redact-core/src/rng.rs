//! Deterministic, platform-independent randomness based on seeded ChaCha
//! streams. A `(master_seed, stream_id)` pair fully determines the sequence
//! of uniform variates, so parallel work derives one stream per task.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Addressable random stream: identical `(master_seed, stream_id)` pairs
/// yield identical variates on any platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// Stream `offset` positions after this one under the same master seed.
    pub fn substream(&self, offset: u64) -> Self {
        RngStream {
            master_seed: self.master_seed,
            stream_id: self.stream_id.wrapping_add(offset),
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Uniform draw on [0, 1) with 53 bits of precision.
#[inline]
pub fn uniform_unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
