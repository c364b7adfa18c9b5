use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, pca_dimension, Matrix, ToleranceSpec};
use crate::net::{JacobianProbe, Network, NetworkSpec};
use crate::rng::GaussianStream;

pub const MAX_CHAIN_WIDTH: usize = 1024;
pub const MAX_CHAIN_DEPTH: usize = 64;

const BATCH_STREAM: u64 = 0xBA7C_4000_0000_0002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainRecord {
    pub depth: usize,
    /// Numerical rank of the full Jacobian of `F_k`.
    pub jacobian_rank: usize,
    /// Numerical rank of the covariance of `F_k` over the input batch.
    pub covariance_rank: usize,
}

/// Per-depth Jacobian rank (at the first batch row) and feature-covariance rank.
pub fn chain_ranks(net: &Network, batch: &Matrix, tol: ToleranceSpec) -> Result<Vec<ChainRecord>> {
    tol.validate()?;
    if batch.cols() != net.input_dim() {
        return Err(Error::Dimension(format!("batch width {} for input width {}", batch.cols(), net.input_dim())));
    }
    let jacobians = net.probe_jacobians(batch.row(0), &JacobianProbe::all(net.input_dim()))?;
    let features: Vec<Vec<Vec<f64>>> = (0..batch.rows()).map(|t| net.evaluate(batch.row(t))).collect::<Result<_>>()?;
    (0..net.depth())
        .into_par_iter()
        .map(|k| {
            let width = net.widths()[k + 1];
            let data: Vec<f64> = features.iter().flat_map(|f| f[k].iter().copied()).collect();
            let cloud = Matrix::new(batch.rows(), width, data)?;
            Ok(ChainRecord {
                depth: k + 1,
                jacobian_rank: numerical_rank(&jacobians[k], tol)?,
                covariance_rank: pca_dimension(&cloud, tol)?,
            })
        })
        .collect()
}

/// Rank decay through a purely linear chain of `depth` Gaussian `width x width`
/// layers (entries `N(0, 1/width)`), measured on a batch of `2 * width` Gaussian inputs.
pub fn linear_chain_experiment(width: usize, depth: usize, seed: u64, tol: ToleranceSpec) -> Result<Vec<ChainRecord>> {
    if width == 0 || width > MAX_CHAIN_WIDTH || depth == 0 || depth > MAX_CHAIN_DEPTH {
        return Err(Error::InvalidInput(format!(
            "chain experiment limited to width 1..={MAX_CHAIN_WIDTH} and depth 1..={MAX_CHAIN_DEPTH}, got {width}x{depth}"
        )));
    }
    let spec = NetworkSpec::gaussian_linear_chain(width, depth, 1.0 / (width as f64).sqrt(), seed);
    let net = Network::from_spec(&spec)?;
    chain_ranks(&net, &chain_batch(width, seed), tol)
}

/// The `2 * width` input batch used by [`linear_chain_experiment`].
pub fn chain_batch(width: usize, seed: u64) -> Matrix {
    GaussianStream::derived(seed, BATCH_STREAM).gaussian_matrix((2 * width).max(2), width, 1.0)
}

/// True when both rank sequences are non-increasing in depth.
pub fn is_monotone(records: &[ChainRecord]) -> bool {
    records.windows(2).all(|w| w[1].jacobian_rank <= w[0].jacobian_rank && w[1].covariance_rank <= w[0].covariance_rank)
}
