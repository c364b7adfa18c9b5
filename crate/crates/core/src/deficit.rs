//! Independence-deficit analysis: express one category's logit as a sparse
//! linear combination of the others.
//!
//! For logit vectors `z_t` and a target category `i`, the solver minimizes
//!
//! ```text
//! (1/N) sum_t (lambda . z_t)^2 + eta * sum_{j != i} |lambda_j|,   lambda_i = -1
//! ```
//!
//! by cyclic coordinate descent. A zero objective means `z_{t,i}` is exactly
//! `sum_{j != i} lambda_j z_{t,j}` on every sample.

use serde::{Deserialize, Serialize};

use crate::diagnostics::argmax;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Coefficients with magnitude below this are reported as zero.
pub const SUPPORT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DeficitProblem {
    /// `N x C` logits, one sample per row.
    pub logits: Matrix,
    pub target: usize,
    pub eta: f64,
    /// Maximum number of full coordinate sweeps.
    pub max_iterations: usize,
    /// Stop once no coordinate moves by more than this in a sweep.
    pub tol: f64,
}

impl DeficitProblem {
    pub fn new(logits: Matrix, target: usize, eta: f64) -> Self {
        Self { logits, target, eta, max_iterations: 10_000, tol: 1e-8 }
    }

    fn validate(&self) -> Result<()> {
        if self.logits.rows() == 0 {
            return Err(Error::SampleCount(0));
        }
        if self.target >= self.logits.cols() {
            return Err(Error::InvalidInput(format!(
                "target {} out of range for {} categories",
                self.target,
                self.logits.cols()
            )));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidInput(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tol must be finite and >= 0, got {}", self.tol)));
        }
        self.logits.check_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitSolution {
    pub target: usize,
    pub eta: f64,
    /// `lambda`, with `coefficients[target] == -1.0`.
    pub coefficients: Vec<f64>,
    /// Indices `j != target` with `|lambda_j| >= SUPPORT_FLOOR`.
    pub support: Vec<usize>,
    pub objective: f64,
    /// Full sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Identically-zero logit columns, whose coefficients stay at 0.
    pub zero_columns: Vec<usize>,
    /// Objective before the first sweep and after each accepted sweep.
    pub objective_history: Vec<f64>,
}

/// Solves the pinned Lasso by cyclic coordinate descent.
///
/// Each update is the exact minimizer along its coordinate,
/// `lambda_j = S(c_j, eta) / a_j` with `a_j = (2/N) sum_t z_{t,j}^2` and
/// `c_j = -(2/N) sum_t z_{t,j} r_t` where `r` is the prediction residual with
/// coordinate `j` removed. The objective is recomputed from scratch after every
/// sweep; a sweep that would raise it (possible only through rounding) is
/// rolled back and ends the iteration, so the history is non-increasing.
pub fn solve_deficit(p: &DeficitProblem) -> Result<DeficitSolution> {
    p.validate()?;
    let (n, c) = p.logits.shape();
    let columns: Vec<Vec<f64>> = (0..c).map(|j| p.logits.column(j)).collect();
    let inv_n = 1.0 / n as f64;
    let curvature: Vec<f64> = columns.iter().map(|z| 2.0 * inv_n * z.iter().map(|v| v * v).sum::<f64>()).collect();
    let zero_columns: Vec<usize> = (0..c).filter(|&j| j != p.target && curvature[j] == 0.0).collect();

    let mut lambda = vec![0.0; c];
    lambda[p.target] = -1.0;
    let mut prediction = predict(&columns, &lambda);
    let mut history = vec![objective(&prediction, &lambda, p.target, p.eta)];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < p.max_iterations {
        let saved = lambda.clone();
        let mut max_change = 0.0f64;
        for j in 0..c {
            if j == p.target || curvature[j] == 0.0 {
                continue;
            }
            let z = &columns[j];
            let old = lambda[j];
            let grad: f64 = z.iter().zip(&prediction).map(|(a, b)| a * (b.0 + b.1)).sum::<f64>() * 2.0 * inv_n;
            let cj = curvature[j] * old - grad;
            let new = soft_threshold(cj, p.eta) / curvature[j];
            let delta = new - old;
            if delta != 0.0 {
                for (s, &zv) in prediction.iter_mut().zip(z) {
                    *s = dd_add(*s, two_prod(delta, zv));
                }
                lambda[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        // Recompute the prediction so rounding does not accumulate across sweeps.
        prediction = predict(&columns, &lambda);
        let value = objective(&prediction, &lambda, p.target, p.eta);
        let last = *history.last().expect("non-empty history");
        if value > last {
            lambda = saved;
            converged = true;
            break;
        }
        iterations += 1;
        history.push(value);
        if max_change <= p.tol {
            converged = true;
            break;
        }
    }
    let support = (0..c).filter(|&j| j != p.target && lambda[j].abs() >= SUPPORT_FLOOR).collect();
    Ok(DeficitSolution {
        target: p.target,
        eta: p.eta,
        objective: *history.last().expect("non-empty history"),
        coefficients: lambda,
        support,
        iterations,
        converged,
        zero_columns,
        objective_history: history,
    })
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Prediction `sum_j lambda_j z_j` in double-double arithmetic, as (hi, lo) pairs.
fn predict(columns: &[Vec<f64>], lambda: &[f64]) -> Vec<(f64, f64)> {
    let mut s = vec![(0.0, 0.0); columns[0].len()];
    for (z, &l) in columns.iter().zip(lambda) {
        if l != 0.0 {
            for (si, &zi) in s.iter_mut().zip(z) {
                *si = dd_add(*si, two_prod(l, zi));
            }
        }
    }
    s
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn dd_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(a.0, b.0);
    let (hi, lo) = two_sum(s, e + a.1 + b.1);
    (hi, lo)
}

fn dd_square(a: (f64, f64)) -> (f64, f64) {
    let (p, e) = two_prod(a.0, a.0);
    two_sum(p, e + 2.0 * a.0 * a.1)
}

/// Objective evaluated in double-double and rounded once, so that a sweep which
/// lowers the exact objective never records a rounding-level increase.
fn objective(prediction: &[(f64, f64)], lambda: &[f64], target: usize, eta: f64) -> f64 {
    let fit = prediction.iter().fold((0.0, 0.0), |acc, &p| dd_add(acc, dd_square(p)));
    let n = prediction.len() as f64;
    let fit = (fit.0 / n, fit.1 / n);
    let l1 = lambda
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target)
        .fold((0.0, 0.0), |acc, (_, l)| dd_add(acc, (l.abs(), 0.0)));
    let penalty = dd_add(two_prod(eta, l1.0), (eta * l1.1, 0.0));
    let total = dd_add(fit, penalty);
    total.0 + total.1
}

/// The Lasso objective of arbitrary coefficients on `logits`.
pub fn deficit_objective(logits: &Matrix, target: usize, eta: f64, lambda: &[f64]) -> Result<f64> {
    if lambda.len() != logits.cols() || target >= logits.cols() {
        return Err(Error::Dimension(format!("{} coefficients for {} categories", lambda.len(), logits.cols())));
    }
    if logits.rows() == 0 {
        return Err(Error::SampleCount(0));
    }
    logits.check_finite()?;
    let columns: Vec<Vec<f64>> = (0..logits.cols()).map(|j| logits.column(j)).collect();
    Ok(objective(&predict(&columns, lambda), lambda, target, eta))
}

/// `sum_{j != target} lambda_j * logits[t][j]` for every sample `t`.
pub fn reconstruct_logits(logits: &Matrix, sol: &DeficitSolution) -> Result<Vec<f64>> {
    if sol.coefficients.len() != logits.cols() || sol.target >= logits.cols() {
        return Err(Error::Dimension(format!(
            "solution has {} coefficients for {} categories",
            sol.coefficients.len(),
            logits.cols()
        )));
    }
    Ok((0..logits.rows())
        .map(|t| {
            logits
                .row(t)
                .iter()
                .zip(&sol.coefficients)
                .enumerate()
                .filter(|&(j, _)| j != sol.target)
                .map(|(_, (z, l))| z * l)
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitAccuracy {
    /// Argmax accuracy with the target column replaced by its reconstruction.
    pub substituted: f64,
    pub original: f64,
    pub positive_only: PositiveAccuracy,
}

/// Accuracies restricted to samples labelled with the target category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositiveAccuracy {
    pub samples: usize,
    /// `None` when no sample carries the target label.
    pub substituted: Option<f64>,
    pub original: Option<f64>,
}

pub fn deficit_accuracy(logits: &Matrix, labels: &[usize], sol: &DeficitSolution) -> Result<DeficitAccuracy> {
    let (n, c) = logits.shape();
    if labels.len() != n {
        return Err(Error::Dimension(format!("{} labels for {n} samples", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::InvalidInput(format!("label {bad} out of range for {c} categories")));
    }
    let reconstructed = reconstruct_logits(logits, sol)?;
    let mut hits = [0usize; 4];
    let mut positives = 0;
    let mut row = vec![0.0; c];
    for t in 0..n {
        row.copy_from_slice(logits.row(t));
        let original = argmax(&row) == labels[t];
        row[sol.target] = reconstructed[t];
        let substituted = argmax(&row) == labels[t];
        hits[0] += substituted as usize;
        hits[1] += original as usize;
        if labels[t] == sol.target {
            positives += 1;
            hits[2] += substituted as usize;
            hits[3] += original as usize;
        }
    }
    let rate = |h: usize, total: usize| (total > 0).then(|| h as f64 / total as f64);
    Ok(DeficitAccuracy {
        substituted: hits[0] as f64 / n as f64,
        original: hits[1] as f64 / n as f64,
        positive_only: PositiveAccuracy {
            samples: positives,
            substituted: rate(hits[2], positives),
            original: rate(hits[3], positives),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn exact_dependency(n: usize, seed: u64) -> Matrix {
        let mut g = GaussianStream::new(seed);
        let mut m = g.gaussian_matrix(n, 5, 1.0);
        for t in 0..n {
            m[(t, 0)] = 2.0 * m[(t, 3)];
        }
        m
    }

    #[test]
    fn recovers_exact_dependency() {
        let logits = exact_dependency(200, 1);
        let sol = solve_deficit(&DeficitProblem::new(logits.clone(), 0, 1e-6)).unwrap();
        let expected = [-1.0, 0.0, 0.0, 2.0, 0.0];
        for (a, b) in sol.coefficients.iter().zip(expected) {
            assert!((a - b).abs() < 1e-3, "{:?}", sol.coefficients);
        }
        assert_eq!(sol.coefficients[0], -1.0);
        assert!(sol.converged);
        assert!(sol.objective_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn large_penalty_zeroes_everything() {
        let logits = exact_dependency(50, 2);
        let sol = solve_deficit(&DeficitProblem::new(logits.clone(), 0, 1e6)).unwrap();
        assert!(sol.support.is_empty());
        assert!(reconstruct_logits(&logits, &sol).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_column_is_flagged() {
        let mut logits = exact_dependency(30, 3);
        for t in 0..30 {
            logits[(t, 2)] = 0.0;
        }
        let sol = solve_deficit(&DeficitProblem::new(logits, 0, 1e-3)).unwrap();
        assert_eq!(sol.zero_columns, vec![2]);
        assert_eq!(sol.coefficients[2], 0.0);
    }

    #[test]
    fn accuracy_with_exact_dependency() {
        let logits = exact_dependency(100, 4);
        let labels: Vec<usize> = (0..100).map(|t| argmax(logits.row(t))).collect();
        let sol = DeficitSolution {
            target: 0,
            eta: 0.0,
            coefficients: vec![-1.0, 0.0, 0.0, 2.0, 0.0],
            support: vec![3],
            objective: 0.0,
            iterations: 0,
            converged: true,
            zero_columns: vec![],
            objective_history: vec![0.0],
        };
        let acc = deficit_accuracy(&logits, &labels, &sol).unwrap();
        assert_eq!(acc.substituted, acc.original);
        assert_eq!(acc.original, 1.0);
        assert_eq!(acc.positive_only.substituted, acc.positive_only.original);
    }

    #[test]
    fn rejects_bad_input() {
        let logits = exact_dependency(10, 5);
        assert!(solve_deficit(&DeficitProblem::new(logits.clone(), 5, 0.0)).is_err());
        assert!(solve_deficit(&DeficitProblem::new(logits, 0, -1.0)).is_err());
    }
}
