//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a [`RngStream`]: a ChaCha8
//! generator keyed by a master seed and positioned on one of its 2^64
//! independent streams. Trials derive their stream id from their
//! (point, trial) coordinates, so results never depend on which worker thread
//! ran which trial.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// SplitMix64 output finalizer (Steele, Lea & Flood constants).
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id for trial `trial_index` of parameter point `point_index`:
/// `mix64(point_index * 2^32 + trial_index)`.
pub const fn trial_stream_id(point_index: u32, trial_index: u32) -> u64 {
    mix64(((point_index as u64) << 32) | trial_index as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub const fn for_trial(master_seed: u64, point_index: u32, trial_index: u32) -> Self {
        Self::new(master_seed, trial_stream_id(point_index, trial_index))
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}
