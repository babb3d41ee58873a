//! Counter-based random streams for reproducible simulation.
//!
//! A stream is ChaCha20 keyed by `master_seed` (expanded with
//! `SeedableRng::seed_from_u64`) with the 64-bit ChaCha stream word set to
//! `stream_id`. Distinct ids select disjoint keystreams of the same key, so
//! trials can be scheduled in any order and still replay bit-for-bit.
//!
//! Gaussian variates use the ziggurat sampler of `rand_distr::StandardNormal`;
//! the sampler is part of the reproducibility contract.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::bits::BitVector;

#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    /// Stream for trial `trial` of sweep point `point`: `(point << 40) | trial`.
    pub fn for_trial(master_seed: u64, point: usize, trial: u64) -> Self {
        debug_assert!(trial < 1 << 40);
        Self::new(master_seed, ((point as u64) << 40) | trial)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Standard normal variate.
    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn bits(&mut self, len: usize) -> BitVector {
        BitVector::random(len, &mut self.inner)
    }

    pub fn uniform_index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
