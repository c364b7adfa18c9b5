use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{count_above, Svd};
use crate::rng::GaussianStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub epsilon: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Monte Carlo estimate of `P(Rank_eps(W) < min(rows, cols))` for standard Gaussian `W`.
pub fn rank_deficiency_probability(
    rows: usize,
    cols: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbabilityEstimate> {
    Ok(rank_deficiency_curve(rows, cols, &[epsilon], trials, seed)?[0])
}

/// Deficiency probabilities for several tolerances over one shared set of
/// sampled matrices (trial `t` uses the stream keyed by `(seed, t)`), so the
/// curve is monotone in `epsilon`.
pub fn rank_deficiency_curve(
    rows: usize,
    cols: usize,
    epsilons: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbabilityEstimate>> {
    if rows == 0 || cols == 0 || trials == 0 {
        return Err(Error::InvalidInput("rows, cols and trials must be positive".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::InvalidInput(format!("epsilon must be finite and >= 0, got {e}")));
    }
    let full = rows.min(cols);
    let spectra: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let w = GaussianStream::derived(seed, t as u64).gaussian_matrix(rows, cols, 1.0);
            Ok(Svd::values_only(&w)?.singular_values)
        })
        .collect::<Result<_>>()?;
    Ok(epsilons
        .iter()
        .map(|&epsilon| {
            let deficient = spectra.iter().filter(|s| count_above(s, epsilon) < full).count();
            let p = deficient as f64 / trials as f64;
            ProbabilityEstimate { epsilon, estimate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials }
        })
        .collect())
}
