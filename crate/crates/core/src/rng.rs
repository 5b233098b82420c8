//! Seeded random streams: ChaCha20 keyed by a 64-bit seed, with independent
//! numbered substreams. Normals come from the inverse CDF so every draw is
//! reproducible given the seed.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::special::norm_quantile;

#[derive(Debug, Clone)]
pub struct SeededStream {
    rng: ChaCha20Rng,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on the open interval `(0, 1)`, on the grid `(i + 0.5) 2^-53`.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        norm_quantile(self.uniform())
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.standard_normal()).collect()
    }
}
