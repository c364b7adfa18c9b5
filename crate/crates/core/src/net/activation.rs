//! Element-wise activations and their derivatives.
//!
//! GELU uses the exact form `x * Phi(x)` with `Phi(x) = (1 + erf(x / sqrt 2)) / 2`;
//! `erf` comes from `libm`, whose piecewise rational approximation is accurate
//! to within an ulp or two.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::net::ActivationKind;

pub fn value(kind: ActivationKind, x: f64) -> f64 {
    match kind {
        ActivationKind::Relu => x.max(0.0),
        ActivationKind::Gelu => x * normal_cdf(x),
        ActivationKind::Silu => x * sigmoid(x),
    }
}

/// Derivative; ReLU uses 0 at the kink.
pub fn derivative(kind: ActivationKind, x: f64) -> f64 {
    match kind {
        ActivationKind::Relu => {
            if x > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        ActivationKind::Gelu => normal_cdf(x) + x * normal_pdf(x),
        ActivationKind::Silu => {
            let s = sigmoid(x);
            s + x * s * (1.0 - s)
        }
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x * FRAC_1_SQRT_2))
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Phi(1) = 0.841344746068542948...
        assert!((value(ActivationKind::Gelu, 1.0) - 0.841_344_746_068_543).abs() < 1e-14);
        assert_eq!(value(ActivationKind::Gelu, 0.0), 0.0);
        assert!((value(ActivationKind::Silu, 2.0) - 2.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert_eq!(value(ActivationKind::Relu, -3.0), 0.0);
        assert_eq!(derivative(ActivationKind::Gelu, 0.0), 0.5);
        assert_eq!(derivative(ActivationKind::Silu, 0.0), 0.5);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        for kind in [ActivationKind::Gelu, ActivationKind::Silu, ActivationKind::Relu] {
            for &x in &[-3.1, -0.7, -0.01, 0.2, 1.3, 4.0] {
                let fd = (value(kind, x + h) - value(kind, x - h)) / (2.0 * h);
                assert!((fd - derivative(kind, x)).abs() < 1e-9, "{kind:?} at {x}");
            }
        }
    }
}
