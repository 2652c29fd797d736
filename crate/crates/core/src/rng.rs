//! Seeded, splittable random streams.
//!
//! A stream is identified by `(seed, stream_id)` and maps onto one ChaCha8
//! keystream: the seed expands into the key and the stream id is the nonce.
//! Each stream is further split into [`Lane`]s, disjoint segments of the
//! keystream that samplers use for their independent components.
//!
//! Replication `b` of a Monte Carlo loop always uses `base.child(b)`, which
//! is what makes results independent of how replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

/// Generator handed to samplers.
pub type StreamRng = ChaCha8Rng;

/// Words reserved per lane; lanes start at `lane << LANE_SHIFT`.
const LANE_SHIFT: u32 = 60;

/// Index of a disjoint segment within one stream. At most 256 lanes fit in
/// the 68-bit ChaCha word counter.
pub type Lane = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Stream `offset` positions after this one (same seed).
    pub fn child(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_add(offset),
        }
    }

    /// Generator positioned at lane 0.
    pub fn rng(&self) -> StreamRng {
        self.lane(0)
    }

    /// Generator positioned at the start of `lane`.
    pub fn lane(&self, lane: Lane) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        if lane != 0 {
            rng.set_word_pos(u128::from(lane) << LANE_SHIFT);
        }
        rng
    }
}

/// Runs `f` on `base.child(0)`, …, `base.child(b − 1)` in parallel and
/// returns the results in replication order.
pub fn replicate<T, F>(base: RngStream, b: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RngStream) -> T + Sync,
{
    (0..b as u64).into_par_iter().map(|i| f(base.child(i))).collect()
}

/// [`replicate`] for fallible replications; the first error in
/// replication order wins.
pub fn try_replicate<T, F>(base: RngStream, b: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(RngStream) -> Result<T> + Sync,
{
    (0..b as u64).into_par_iter().map(|i| f(base.child(i))).collect()
}
