use crate::error::{Error, Result};

/// Arguments below this are shifted upward by the recurrence before the asymptotic series.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// Coefficients `B_{2k} / (2k)` of the asymptotic expansion, k = 1..7.
const SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// The digamma function `psi(x) = d/dx ln Gamma(x)` for `x > 0`.
///
/// Uses `psi(x) = psi(x + 1) - 1/x` to reach `x >= 10`, then
/// `psi(x) ~ ln x - 1/(2x) - sum_k B_{2k} / (2k x^{2k})`, truncated after
/// `x^-14`; the truncation error there is below `1e-16`.
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(Error::Domain(format!("digamma requires a finite x > 0, got {x}")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_FROM {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut poly = 0.0;
    for c in SERIES.iter().rev() {
        poly = poly * inv2 + c;
    }
    Ok(x.ln() - 0.5 / x - inv2 * poly - shift)
}
