use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{principal_axes, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetentionMode {
    /// Target accuracy is `retention * accuracy on the unprojected features`.
    RelativeToBaseline,
    /// Target accuracy is `retention` itself.
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClsDimConfig {
    /// Fraction in (0, 1].
    pub retention: f64,
    pub mode: RetentionMode,
    /// Linear classification head, `classes x features`.
    pub head: Matrix,
}

impl ClsDimConfig {
    pub fn new(head: Matrix) -> Self {
        Self { retention: 0.95, mode: RetentionMode::RelativeToBaseline, head }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClsDimResult {
    /// Smallest number of leading principal components meeting the target, or
    /// the feature width when no `k` does.
    pub dimension: usize,
    /// False when the target was never met.
    pub met: bool,
    pub baseline_accuracy: f64,
    pub target_accuracy: f64,
    /// Accuracy at `k = 1..=dimension`.
    pub accuracies: Vec<f64>,
}

/// Classification dimension: the smallest `k` such that classifying the
/// projection of every feature onto the top-`k` covariance eigenvectors keeps
/// the configured fraction of accuracy.
///
/// Features are projected onto the linear span of the eigenvectors (no
/// re-centering), and `k` is scanned upward from 1.
pub fn cls_dim(features: &Matrix, labels: &[usize], cfg: &ClsDimConfig) -> Result<ClsDimResult> {
    let (n, d) = features.shape();
    if labels.len() != n {
        return Err(Error::Dimension(format!("{} labels for {n} samples", labels.len())));
    }
    if cfg.head.cols() != d {
        return Err(Error::Dimension(format!("head expects {} features, data has {d}", cfg.head.cols())));
    }
    let classes = cfg.head.rows();
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidInput(format!("label {bad} outside the {classes} head outputs")));
    }
    if !(cfg.retention > 0.0 && cfg.retention <= 1.0) {
        return Err(Error::InvalidInput(format!("retention must lie in (0, 1], got {}", cfg.retention)));
    }
    cfg.head.check_finite()?;

    let count_correct = |logits: &Matrix| (0..n).filter(|&t| argmax(logits.row(t)) == labels[t]).count();
    let baseline = count_correct(&features.matmul(&cfg.head.transpose())?);
    let target = match cfg.mode {
        RetentionMode::RelativeToBaseline => cfg.retention * baseline as f64,
        RetentionMode::Absolute => cfg.retention * n as f64,
    };
    // slack for the floating-point product above
    let meets = |correct: usize| correct as f64 >= target - 1e-9;

    let (_, axes) = principal_axes(features)?;
    let mut logits = Matrix::zeros(n, classes);
    let mut accuracies = Vec::new();
    for k in 0..d {
        let axis = axes.column(k);
        let head_axis = cfg.head.matvec(&axis)?;
        for t in 0..n {
            let coeff: f64 = features.row(t).iter().zip(&axis).map(|(a, b)| a * b).sum();
            for (l, h) in logits.row_mut(t).iter_mut().zip(&head_axis) {
                *l += coeff * h;
            }
        }
        let correct = count_correct(&logits);
        accuracies.push(correct as f64 / n as f64);
        if meets(correct) {
            return Ok(ClsDimResult {
                dimension: k + 1,
                met: true,
                baseline_accuracy: baseline as f64 / n as f64,
                target_accuracy: target / n as f64,
                accuracies,
            });
        }
    }
    Ok(ClsDimResult {
        dimension: d,
        met: false,
        baseline_accuracy: baseline as f64 / n as f64,
        target_accuracy: target / n as f64,
        accuracies,
    })
}

/// Index of the largest entry, first on ties.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
