//! Seed streams and Gaussian sampling.
//!
//! Every stochastic quantity in the crate is drawn from a ChaCha8 stream whose
//! seed is derived by splitmix64 mixing of a master seed and a small tuple of
//! stream indices (layer, trial, point). Normal deviates come from the
//! Box-Muller transform so the sequence is fixed across platforms.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a stream index.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xD605_BBB5_8C8A_BBAD))
}

/// Standard-normal sampler over a deterministic ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Stream for `(parent, index)`, e.g. a trial or layer of a run.
    pub fn derived(parent: u64, index: u64) -> Self {
        Self::new(derive_seed(parent, index))
    }

    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn gaussian_vec(&mut self, len: usize, std: f64) -> Vec<f64> {
        (0..len).map(|_| std * self.next_gaussian()).collect()
    }

    /// A `rows x cols` matrix of i.i.d. `N(0, std^2)` entries, filled row by row.
    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize, std: f64) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| std * self.next_gaussian())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = GaussianStream::derived(7, 3).gaussian_vec(16, 1.0);
        let b = GaussianStream::derived(7, 3).gaussian_vec(16, 1.0);
        let c = GaussianStream::derived(7, 4).gaussian_vec(16, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn box_muller_moments() {
        let mut s = GaussianStream::new(11);
        let n = 200_000;
        let xs = s.gaussian_vec(n, 1.0);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }
}
