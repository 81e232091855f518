//! Reproducible random streams keyed by `(seed, stream_id)`.
//!
//! Each stream is a ChaCha8 generator seeded from `seed` and positioned on
//! the 64-bit stream `stream_id`, so replica `i` of an experiment always sees
//! the same draws no matter which worker thread runs it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on the open interval (0, 1), on a grid of 2^-53.
    ///
    /// Zero is excluded so that `-ln(U)` is finite, and one is excluded so
    /// that exponential draws are strictly positive.
    pub fn uniform(&mut self) -> f64 {
        let k = self.inner.next_u64() >> 11;
        (k as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Uniform draw on the open interval (a, b).
    pub fn uniform_in(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.uniform()
    }

    /// Unit-mean exponential draw by inverse transform.
    pub fn exp1(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Exponential draw with the given rate.
    pub fn exp_rate(&mut self, rate: f64) -> f64 {
        self.exp1() / rate
    }
}
