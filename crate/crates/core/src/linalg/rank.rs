use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Svd};

/// Machine epsilon of IEEE single precision, as used for the float32 rank convention.
pub const FLOAT32_EPS: f64 = 1.19e-7;

/// Relative width of the guard band around each singular value ratio in which
/// [`perturbation_budget`] refuses to answer.
pub const DEGENERATE_GUARD: f64 = 1e-12;

/// Relative threshold for counting singular values (or eigenvalues).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ToleranceSpec {
    /// Count values `>= epsilon * largest`.
    RelativeEpsilon { epsilon: f64 },
    /// `epsilon = 1.19e-7 * count`, where `count` is the number of values measured.
    Float32Convention { count: usize },
}

impl ToleranceSpec {
    pub fn relative(epsilon: f64) -> Result<Self> {
        let tol = ToleranceSpec::RelativeEpsilon { epsilon };
        tol.validate()?;
        Ok(tol)
    }

    pub fn float32(count: usize) -> Result<Self> {
        let tol = ToleranceSpec::Float32Convention { count };
        tol.validate()?;
        Ok(tol)
    }

    /// Float32 convention sized to the number of singular values of `m`.
    pub fn float32_for(m: &Matrix) -> Self {
        ToleranceSpec::Float32Convention { count: m.rows().min(m.cols()) }
    }

    pub fn epsilon(&self) -> f64 {
        match *self {
            ToleranceSpec::RelativeEpsilon { epsilon } => epsilon,
            ToleranceSpec::Float32Convention { count } => FLOAT32_EPS * count as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eps = self.epsilon();
        if eps.is_finite() && eps > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("tolerance must resolve to a positive finite epsilon, got {eps}")))
        }
    }
}

/// Sorted singular values of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub singular_values: Vec<f64>,
}

impl Spectrum {
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// `#{i : sigma_i >= epsilon * sigma_1}`, zero for the zero matrix.
    pub fn rank_at(&self, epsilon: f64) -> usize {
        count_above(&self.singular_values, epsilon)
    }
}

pub(crate) fn count_above(sorted_desc: &[f64], epsilon: f64) -> usize {
    let top = match sorted_desc.first() {
        Some(&t) if t > 0.0 => t,
        _ => return 0,
    };
    let threshold = epsilon * top;
    sorted_desc.iter().take_while(|&&s| s >= threshold).count()
}

/// Singular values of `m`, sorted descending.
pub fn singular_values(m: &Matrix) -> Result<Spectrum> {
    Ok(Spectrum { singular_values: Svd::values_only(m)?.singular_values })
}

/// Singular values together with the tolerance-dependent numerical rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub singular_values: Vec<f64>,
    pub spectral_norm: f64,
    pub tolerance: ToleranceSpec,
    pub numerical_rank: usize,
}

impl SpectralSummary {
    pub fn compute(m: &Matrix, tolerance: ToleranceSpec) -> Result<Self> {
        tolerance.validate()?;
        let spectrum = singular_values(m)?;
        Ok(Self {
            spectral_norm: spectrum.spectral_norm(),
            numerical_rank: spectrum.rank_at(tolerance.epsilon()),
            singular_values: spectrum.singular_values,
            tolerance,
        })
    }
}

/// Number of singular values at or above `epsilon * ||m||_2`.
pub fn numerical_rank(m: &Matrix, tol: ToleranceSpec) -> Result<usize> {
    tol.validate()?;
    Ok(singular_values(m)?.rank_at(tol.epsilon()))
}

/// Largest `delta_max` such that `numerical_rank(w + delta * d, epsilon)` equals
/// `numerical_rank(w, epsilon)` for every `delta` in `[0, delta_max)`.
///
/// The bound follows from Weyl's inequality `|sigma_i(W + dD) - sigma_i(W)| <= d * sigma_1(D)`
/// applied to the ratios on both sides of the threshold: with `r` the current rank,
///
/// ```text
/// delta_max = min{ ((s_r + s_1)/(eps + 1) - s_1) / s_1(D),   s_r / (2 s_1(D)),
///                  (s_1 - (s_{r+1} + s_1)/(eps + 1)) / s_1(D), s_1 / (2 s_1(D)) }
/// ```
///
/// where terms that mention `s_{r+1}` are dropped at full rank. Returns
/// `f64::INFINITY` when `d` is zero or when no ratio can reach the threshold
/// (`epsilon > 1`), and `0` for a zero `w` perturbed by a nonzero `d`.
pub fn perturbation_budget(w: &Matrix, d: &Matrix, epsilon: f64) -> Result<f64> {
    if w.shape() != d.shape() {
        return Err(Error::Dimension(format!(
            "perturbation shape {:?} does not match matrix shape {:?}",
            d.shape(),
            w.shape()
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    let sw = singular_values(w)?.singular_values;
    let d_norm = singular_values(d)?.spectral_norm();
    if d_norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    let s1 = sw[0];
    if s1 == 0.0 {
        return Ok(if epsilon > 1.0 { f64::INFINITY } else { 0.0 });
    }
    for &s in &sw {
        let ratio = s / s1;
        if (epsilon - ratio).abs() <= DEGENERATE_GUARD * epsilon {
            return Err(Error::DegenerateTolerance { epsilon, ratio });
        }
    }
    if epsilon > 1.0 {
        return Ok(f64::INFINITY);
    }
    let r = count_above(&sw, epsilon);
    let sr = sw[r - 1];
    let mut budget = (((sr + s1) / (epsilon + 1.0) - s1) / d_norm)
        .min(sr / (2.0 * d_norm))
        .min(s1 / (2.0 * d_norm));
    if let Some(&next) = sw.get(r) {
        budget = budget.min((s1 - (next + s1) / (epsilon + 1.0)) / d_norm);
    }
    Ok(budget.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let m = Matrix::from_diag(&[1.0, 0.5, 1e-9]);
        assert_eq!(numerical_rank(&m, ToleranceSpec::relative(1e-3).unwrap()).unwrap(), 2);
        for eps in [1e-12, 1e-3, 0.5, 1.0] {
            assert_eq!(numerical_rank(&Matrix::identity(5), ToleranceSpec::relative(eps).unwrap()).unwrap(), 5);
        }
        assert_eq!(numerical_rank(&Matrix::zeros(3, 4), ToleranceSpec::float32(3).unwrap()).unwrap(), 0);
    }

    #[test]
    fn tolerance_resolution() {
        assert_eq!(ToleranceSpec::float32(1000).unwrap().epsilon(), 1.19e-7 * 1000.0);
        assert!(ToleranceSpec::float32(0).is_err());
        assert!(ToleranceSpec::relative(0.0).is_err());
        assert!(ToleranceSpec::relative(f64::NAN).is_err());
        let json = serde_json::to_string(&ToleranceSpec::float32(4).unwrap()).unwrap();
        assert_eq!(json, r#"{"mode":"float32_convention","count":4}"#);
    }

    #[test]
    fn summary_fields() {
        let s = SpectralSummary::compute(&Matrix::from_diag(&[2.0, -3.0]), ToleranceSpec::relative(0.9).unwrap())
            .unwrap();
        assert_eq!(s.singular_values, vec![3.0, 2.0]);
        assert_eq!(s.spectral_norm, 3.0);
        assert_eq!(s.numerical_rank, 1);
    }

    #[test]
    fn budget_examples() {
        let w = Matrix::from_diag(&[1.0, 0.5]);
        let b = perturbation_budget(&w, &Matrix::identity(2), 0.25).unwrap();
        assert!((b - 0.2).abs() < 1e-14, "{b}");
        let w = Matrix::from_diag(&[1.0, 0.0]);
        let b = perturbation_budget(&w, &Matrix::identity(2), 0.5).unwrap();
        assert!((b - 1.0 / 3.0).abs() < 1e-14, "{b}");
        assert_eq!(perturbation_budget(&w, &Matrix::zeros(2, 2), 0.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn budget_errors() {
        let w = Matrix::from_diag(&[1.0, 0.5]);
        assert!(matches!(
            perturbation_budget(&w, &Matrix::identity(2), 0.5),
            Err(Error::DegenerateTolerance { .. })
        ));
        assert!(matches!(
            perturbation_budget(&w, &Matrix::identity(2), 1.0),
            Err(Error::DegenerateTolerance { .. })
        ));
        assert!(perturbation_budget(&w, &Matrix::identity(3), 0.1).is_err());
        assert!(perturbation_budget(&w, &Matrix::identity(2), -0.1).is_err());
        assert_eq!(perturbation_budget(&w, &Matrix::identity(2), 2.0).unwrap(), f64::INFINITY);
    }
}
