use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{pca_dimension, Matrix, ToleranceSpec};
use crate::net::Network;
use crate::rng::GaussianStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PertDimConfig {
    /// Standard deviation of the input-space perturbations.
    pub noise_std: f64,
    /// Perturbed copies drawn around each point.
    pub samples: usize,
}

impl Default for PertDimConfig {
    fn default() -> Self {
        Self { noise_std: 1e-3, samples: 2000 }
    }
}

impl PertDimConfig {
    fn validate(&self) -> Result<()> {
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidInput(format!("noise std must be positive, got {}", self.noise_std)));
        }
        if self.samples < 2 {
            return Err(Error::SampleCount(self.samples));
        }
        Ok(())
    }

    /// Eigenvalue threshold: `1.19e-7 * samples` relative to the largest eigenvalue.
    pub fn tolerance(&self) -> ToleranceSpec {
        ToleranceSpec::Float32Convention { count: self.samples }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PertDimResult {
    pub depth: usize,
    /// Mean PCA dimension over points.
    pub mean: f64,
    pub per_point: Vec<usize>,
}

/// Perturbed PCA dimension at every depth `0..=L` (depth 0 is the input space).
///
/// Around each point `x`, draws `samples` inputs `x + e` with `e ~ N(0, noise_std^2 I)`
/// (point `p` uses the stream keyed by `(seed, p)`), maps them through every
/// sub-network and counts covariance eigenvalues above the float32 threshold.
/// Perturbations live in the ambient input space, so on curved feature
/// manifolds the count can exceed the local dimension of the manifold itself.
pub fn perturbed_pca_dims(
    net: &Network,
    points: &[Vec<f64>],
    cfg: &PertDimConfig,
    seed: u64,
) -> Result<Vec<PertDimResult>> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidInput("at least one point is required".into()));
    }
    let tol = cfg.tolerance();
    let per_point: Vec<Vec<usize>> = points
        .par_iter()
        .enumerate()
        .map(|(p, x)| point_dims(net, x, cfg, seed, p as u64, tol))
        .collect::<Result<_>>()?;
    Ok((0..=net.depth())
        .map(|depth| {
            let dims: Vec<usize> = per_point.iter().map(|d| d[depth]).collect();
            let mean = dims.iter().sum::<usize>() as f64 / dims.len() as f64;
            PertDimResult { depth, mean, per_point: dims }
        })
        .collect())
}

/// Perturbed PCA dimension at a single depth `k` (0 = input space).
pub fn perturbed_pca_dim(
    net: &Network,
    depth: usize,
    points: &[Vec<f64>],
    cfg: &PertDimConfig,
    seed: u64,
) -> Result<PertDimResult> {
    if depth > net.depth() {
        return Err(Error::InvalidInput(format!("depth {depth} outside 0..={}", net.depth())));
    }
    Ok(perturbed_pca_dims(net, points, cfg, seed)?.swap_remove(depth))
}

fn point_dims(net: &Network, x: &[f64], cfg: &PertDimConfig, seed: u64, index: u64, tol: ToleranceSpec) -> Result<Vec<usize>> {
    let mut stream = GaussianStream::derived(seed, index);
    let depth = net.depth();
    let widths = net.widths();
    let mut clouds: Vec<Vec<f64>> = widths.iter().map(|w| Vec::with_capacity(w * cfg.samples)).collect();
    for _ in 0..cfg.samples {
        let noisy: Vec<f64> = x.iter().map(|v| v + cfg.noise_std * stream.next_gaussian()).collect();
        let features = net.evaluate(&noisy)?;
        clouds[0].extend_from_slice(&noisy);
        for (k, f) in features.iter().enumerate() {
            clouds[k + 1].extend_from_slice(f);
        }
    }
    (0..=depth)
        .map(|k| {
            let cloud = Matrix::new(cfg.samples, widths[k], std::mem::take(&mut clouds[k]))?;
            pca_dimension(&cloud, tol)
        })
        .collect()
}
