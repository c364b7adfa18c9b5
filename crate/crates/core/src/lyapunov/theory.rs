use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::lyapunov::digamma;

/// Closed-form Lyapunov spectrum of products of `n x n` standard Gaussian
/// matrices: `lambda_k = (ln 2 + psi((n - k + 1) / 2)) / 2`, k = 1..n.
pub fn theory_spectrum(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    (1..=n).map(|k| Ok(0.5 * (LN_2 + digamma((n - k + 1) as f64 / 2.0)?))).collect()
}

/// Per-layer contraction of `sigma_k / sigma_1`:
/// `exp((psi((n - k + 1) / 2) - psi(n / 2)) / 2)`, for `2 <= k <= n`.
pub fn theory_ratio_rate(n: usize, k: usize) -> Result<f64> {
    if k < 2 || k > n {
        return Err(Error::InvalidInput(format!("index k = {k} outside 2..={n}")));
    }
    let half_gap = 0.5 * (digamma((n - k + 1) as f64 / 2.0)? - digamma(n as f64 / 2.0)?);
    Ok(half_gap.exp())
}

/// Growth rate of `log ||J_F||_2` per layer, `(ln 2 + psi(n / 2)) / 2`.
pub fn gradient_growth_rate(n: usize) -> Result<f64> {
    Ok(theory_spectrum(n)?[0])
}

/// Source of the per-layer contraction rate of `sigma_2 / sigma_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSource {
    /// `theory_ratio_rate(n, 2)`.
    Theory,
    Measured(f64),
}

/// Smallest depth `L` at which the second singular value ratio is predicted to
/// fall under the rank tolerance, so that the numerical rank collapses to 1.
///
/// Uses the bound `L > log(n * epsilon) / log(rate)`, i.e. the smallest `L >= 1`
/// with `rate^L < n * epsilon`. `n` also selects the theoretical rate.
pub fn collapse_depth(n: usize, epsilon: f64, source: RateSource) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let rate = match source {
        RateSource::Theory => theory_ratio_rate(n, 2)?,
        RateSource::Measured(r) => r,
    };
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::InvalidInput(format!("rate must be positive, got {rate}")));
    }
    if rate >= 1.0 {
        return Err(Error::NonContracting(rate));
    }
    let target = (n as f64 * epsilon).ln();
    let log_rate = rate.ln();
    let below = |l: usize| (l as f64) * log_rate < target;
    let mut depth = ((target / log_rate).floor().max(0.0) as usize).max(1);
    while depth > 1 && below(depth - 1) {
        depth -= 1;
    }
    while !below(depth) {
        depth += 1;
    }
    Ok(depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_spectrum() {
        let l = theory_spectrum(2).unwrap();
        // (ln 2 - gamma) / 2
        assert!((l[0] - 0.057_965_757_829_206_2).abs() < 1e-12, "{}", l[0]);
        assert!((l[0] - l[1] - LN_2).abs() < 1e-13);
    }

    #[test]
    fn spectrum_strictly_decreasing_and_rates_below_one() {
        for n in 2..=12 {
            let l = theory_spectrum(n).unwrap();
            assert!(l.windows(2).all(|w| w[0] > w[1]));
            assert!(l[0] > 0.0, "gradient growth positive for n = {n}");
            let rates: Vec<f64> = (2..=n).map(|k| theory_ratio_rate(n, k).unwrap()).collect();
            assert!(rates.iter().all(|&r| r < 1.0));
            assert!(rates.windows(2).all(|w| w[0] > w[1]));
            // rate(n, k) = exp(lambda_k - lambda_1)
            for k in 2..=n {
                assert!((rates[k - 2] - (l[k - 1] - l[0]).exp()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ratio_rate_examples() {
        assert!((theory_ratio_rate(2, 2).unwrap() - 0.5).abs() < 1e-15);
        // psi(1/2) - psi(2) = -gamma - 2 ln 2 - (1 - gamma) = -1 - 2 ln 2
        let expected = (0.5 * (-1.0 - 2.0 * LN_2)).exp();
        assert!((theory_ratio_rate(4, 4).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.3033).abs() < 1e-4);
        assert!(theory_ratio_rate(4, 1).is_err());
        assert!(theory_ratio_rate(4, 5).is_err());
    }

    #[test]
    fn collapse_depth_examples() {
        let eps = 1.19e-7 * 2.0;
        assert_eq!(collapse_depth(2, eps, RateSource::Measured(0.5)).unwrap(), 22);
        assert_eq!(collapse_depth(2, eps, RateSource::Theory).unwrap(), 22);
        assert_eq!(collapse_depth(1, 0.5, RateSource::Measured(0.5)).unwrap(), 2);
        assert_eq!(collapse_depth(4, 0.5, RateSource::Measured(0.5)).unwrap(), 1);
        assert!(matches!(collapse_depth(2, 0.1, RateSource::Measured(1.0)), Err(Error::NonContracting(_))));
        assert!(collapse_depth(2, 1.5, RateSource::Theory).is_err());
        assert!(collapse_depth(2, 0.1, RateSource::Measured(-0.5)).is_err());
    }

    #[test]
    fn collapse_depth_is_minimal() {
        for &(n, eps, rate) in &[(2usize, 1e-3, 0.3), (3, 1e-7, 0.9), (8, 1e-5, 0.61), (1, 0.25, 0.5)] {
            let l = collapse_depth(n, eps, RateSource::Measured(rate)).unwrap();
            let bound = n as f64 * eps;
            assert!(rate.powi(l as i32) < bound);
            assert!(l == 1 || rate.powi(l as i32 - 1) >= bound);
        }
    }
}
