use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{householder_qr, Matrix};
use crate::lyapunov::theory_spectrum;
use crate::rng::GaussianStream;

/// Parameters of a Gaussian product-chain simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    pub dimension: usize,
    pub depth: usize,
    pub trials: usize,
    pub seed: u64,
}

impl ChainConfig {
    fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.depth == 0 || self.trials == 0 {
            return Err(Error::InvalidInput(format!(
                "dimension, depth and trials must be positive (got {}, {}, {})",
                self.dimension, self.depth, self.trials
            )));
        }
        Ok(())
    }

    /// Factor stream of one trial; factors are drawn in order, each row by row.
    pub fn trial_stream(&self, trial: usize) -> GaussianStream {
        GaussianStream::derived(self.seed, trial as u64)
    }
}

/// Row `i` of a matrix kept as `exp(log_scale) * direction` with a unit direction.
#[derive(Debug, Clone)]
struct ScaledRow {
    log_scale: f64,
    direction: Vec<f64>,
}

impl ScaledRow {
    /// Normalizes `v * exp(base)`.
    fn from_scaled(v: Vec<f64>, base: f64) -> Self {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !base.is_finite() {
            let n = v.len();
            return Self { log_scale: f64::NEG_INFINITY, direction: vec![0.0; n] };
        }
        Self { log_scale: base + norm.ln(), direction: v.into_iter().map(|x| x / norm).collect() }
    }
}

/// Accumulates `J = G_L ... G_1` as `Q T` with `Q` orthogonal and `T` upper
/// triangular, re-orthonormalizing after every factor. `T` is held row-wise in
/// log-scaled form so neither growth nor decay of the product can overflow.
#[derive(Debug, Clone)]
pub struct ProductAccumulator {
    frame: Matrix,
    rows: Vec<ScaledRow>,
    factors: usize,
}

impl ProductAccumulator {
    pub fn new(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                ScaledRow { log_scale: 0.0, direction: e }
            })
            .collect();
        Self { frame: Matrix::identity(n), rows, factors: 0 }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    /// Left-multiplies the accumulated product by `g`.
    pub fn push(&mut self, g: &Matrix) -> Result<()> {
        let n = self.dimension();
        if g.shape() != (n, n) {
            return Err(Error::Dimension(format!("factor is {}x{}, expected {n}x{n}", g.rows(), g.cols())));
        }
        g.check_finite()?;
        let (q, r) = householder_qr(&g.matmul(&self.frame)?);
        self.frame = q;
        // T <- R T, row by row; row i of R T mixes rows j >= i of T.
        let new_rows = (0..n)
            .map(|i| {
                let base = self.rows[i..].iter().map(|row| row.log_scale).fold(f64::NEG_INFINITY, f64::max);
                let mut v = vec![0.0; n];
                if base.is_finite() {
                    for j in i..n {
                        let coeff = r[(i, j)] * (self.rows[j].log_scale - base).exp();
                        if coeff != 0.0 {
                            for (vk, dk) in v.iter_mut().zip(&self.rows[j].direction) {
                                *vk += coeff * dk;
                            }
                        }
                    }
                }
                ScaledRow::from_scaled(v, base)
            })
            .collect();
        self.rows = new_rows;
        self.factors += 1;
        Ok(())
    }

    /// `log sigma_k` of the accumulated product, non-increasing in `k`.
    ///
    /// Runs a one-sided Jacobi iteration on the log-scaled rows of `T`, which
    /// share their singular values with the product.
    pub fn log_singular_values(&self) -> Vec<f64> {
        let mut rows = self.rows.clone();
        let n = rows.len();
        let tol = f64::EPSILON * (n as f64).sqrt();
        for _ in 0..100 {
            let mut rotated = false;
            for p in 0..n.saturating_sub(1) {
                for q in p + 1..n {
                    if !(rows[p].log_scale.is_finite() && rows[q].log_scale.is_finite()) {
                        continue;
                    }
                    let cosine: f64 = rows[p].direction.iter().zip(&rows[q].direction).map(|(a, b)| a * b).sum();
                    if cosine.abs() <= tol {
                        continue;
                    }
                    let (lp, lq) = (rows[p].log_scale, rows[q].log_scale);
                    let Some(rot) = Rotation::new(lq - lp, cosine) else { continue };
                    rotated = true;
                    let (dp, dq) = (&rows[p].direction, &rows[q].direction);
                    // r_p' = c r_p - s r_q and r_q' = s r_p + c r_q, each formed
                    // relative to its own largest term.
                    let new_p = combine(rot.log_c + lp, 1.0, dp, rot.log_s + lq, -rot.sign_s, dq);
                    let new_q = combine(rot.log_s + lp, rot.sign_s, dp, rot.log_c + lq, 1.0, dq);
                    rows[p] = new_p;
                    rows[q] = new_q;
                }
            }
            if !rotated {
                break;
            }
        }
        let mut logs: Vec<f64> = rows.iter().map(|r| r.log_scale).collect();
        logs.sort_by(|a, b| b.total_cmp(a));
        logs
    }
}

/// Jacobi rotation `[c -s; s c]` with `c` and `|s|` held as logarithms.
struct Rotation {
    log_c: f64,
    log_s: f64,
    sign_s: f64,
}

impl Rotation {
    /// Rotation orthogonalizing rows `p` and `q` with `log|r_q| - log|r_p| = gap`
    /// and direction cosine `cosine`; `None` when the rotation is the identity.
    fn new(gap: f64, cosine: f64) -> Option<Self> {
        // zeta = (|r_q|^2 - |r_p|^2) / (2 r_p . r_q) = sinh(gap) / cosine
        if gap.abs() > 30.0 {
            // t = 1 / (2 zeta) to within a relative 1e-26, and c = 1.
            let sign_s = gap.signum() * cosine.signum();
            return Some(Self { log_c: 0.0, log_s: cosine.abs().ln() - gap.abs(), sign_s });
        }
        let zeta = gap.sinh() / cosine;
        let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
        if t == 0.0 || !t.is_finite() {
            return None;
        }
        let c = 1.0 / (1.0 + t * t).sqrt();
        Some(Self { log_c: c.ln(), log_s: (c * t.abs()).ln(), sign_s: t.signum() })
    }
}

/// `sign_a exp(log_a) a + sign_b exp(log_b) b` as a scaled row.
fn combine(log_a: f64, sign_a: f64, a: &[f64], log_b: f64, sign_b: f64, b: &[f64]) -> ScaledRow {
    let base = log_a.max(log_b);
    let wa = sign_a * (log_a - base).exp();
    let wb = sign_b * (log_b - base).exp();
    ScaledRow::from_scaled(a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect(), base)
}

/// `log sigma_k` of one simulated product of `cfg.depth` Gaussian factors.
pub fn simulate_trial(cfg: &ChainConfig, trial: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut stream = cfg.trial_stream(trial);
    let mut acc = ProductAccumulator::new(cfg.dimension);
    for _ in 0..cfg.depth {
        acc.push(&stream.gaussian_matrix(cfg.dimension, cfg.dimension, 1.0))?;
    }
    Ok(acc.log_singular_values())
}

/// Per-trial `log sigma_k(J_F)`, `k = 1..n`, for `cfg.trials` independent chains.
pub fn simulate_chain(cfg: &ChainConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    (0..cfg.trials).into_par_iter().map(|t| simulate_trial(cfg, t)).collect()
}

/// Monte Carlo Lyapunov spectrum with its closed-form counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub config: ChainConfig,
    /// Mean over trials of `log(sigma_k) / L`.
    pub estimates: Vec<f64>,
    /// Standard error of each estimate (0 for a single trial).
    pub stderrs: Vec<f64>,
    pub theory: Vec<f64>,
}

impl LyapunovEstimate {
    pub fn abs_error(&self, k: usize) -> f64 {
        (self.estimates[k] - self.theory[k]).abs()
    }

    /// Signed deviation from theory in units of the standard error.
    pub fn z_score(&self, k: usize) -> f64 {
        (self.estimates[k] - self.theory[k]) / self.stderrs[k]
    }

    /// Whether index `k` (0-based) lies within `sigmas` standard errors of theory.
    pub fn within(&self, k: usize, sigmas: f64) -> bool {
        self.abs_error(k) <= sigmas * self.stderrs[k]
    }
}

/// Averages `(1/L) log sigma_k` over trials, in the log domain.
pub fn estimate_spectrum(cfg: &ChainConfig) -> Result<LyapunovEstimate> {
    let samples = simulate_chain(cfg)?;
    let n = cfg.dimension;
    let per_layer = 1.0 / cfg.depth as f64;
    let trials = samples.len() as f64;
    let mut estimates = vec![0.0; n];
    let mut stderrs = vec![0.0; n];
    for k in 0..n {
        let xs: Vec<f64> = samples.iter().map(|s| s[k] * per_layer).collect();
        let mean = xs.iter().sum::<f64>() / trials;
        estimates[k] = mean;
        if samples.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1.0);
            stderrs[k] = (var / trials).sqrt();
        }
    }
    Ok(LyapunovEstimate { config: *cfg, estimates, stderrs, theory: theory_spectrum(n)? })
}

/// Fraction of simulated chains whose numerical rank at relative tolerance
/// `epsilon` is exactly 1, i.e. `sigma_2 / sigma_1 < epsilon`.
pub fn rank_one_fraction(cfg: &ChainConfig, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let log_eps = epsilon.ln();
    let samples = simulate_chain(cfg)?;
    let hits = samples
        .iter()
        .filter(|s| s.iter().filter(|&&l| l - s[0] >= log_eps).count() == 1)
        .count();
    Ok(hits as f64 / samples.len() as f64)
}
