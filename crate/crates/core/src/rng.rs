//! Seeded random vectors. Everything random in the crate flows through here so
//! that a seed fully determines a run.

use alloc::vec::Vec;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SeededVectors {
    rng: ChaCha8Rng,
}

impl SeededVectors {
    pub fn new(seed: u64) -> Self {
        SeededVectors { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform on `[-1, 1)`.
    pub fn uniform(&mut self) -> f64 {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * unit - 1.0
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }
}

/// Vector with entries uniform on `[-1, 1)` drawn from `seed`.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    SeededVectors::new(seed).vector(n)
}
