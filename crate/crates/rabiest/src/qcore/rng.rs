//! Deterministic random number streams.
//!
//! Every stochastic routine in the crate draws from an [`RngStream`], a
//! ChaCha12 generator seeded from a single `u64`. Independent substreams for
//! parallel-in-structure work (per-trajectory, per-probe) come from
//! [`RngStream::substream`], which reuses the root seed but selects a
//! distinct ChaCha stream counter, so results are reproducible regardless of
//! the order in which substreams are consumed.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// A seeded, stream-addressable random source.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
    seed: u64,
}

impl RngStream {
    /// Root stream for a seed (ChaCha stream counter 0).
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            seed,
        }
    }

    /// Independent substream `index` of the same root seed.
    ///
    /// Substreams use stream counters starting at 1 so none collides with
    /// the root stream.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(index + 1);
        Self {
            rng,
            seed: self.seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw from [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}
