//! Lyapunov spectra of products of Gaussian matrices.
//!
//! For `J = G_L ... G_1` with i.i.d. standard Gaussian `n x n` factors,
//! `(1/L) log sigma_k(J)` converges to `(ln 2 + psi((n - k + 1)/2)) / 2`.
//! The ratio `sigma_k / sigma_1` therefore decays geometrically with depth and
//! the numerical rank of the product collapses to one.

mod digamma;
mod simulate;
mod theory;

pub use digamma::digamma;
pub use simulate::{
    estimate_spectrum, rank_one_fraction, simulate_chain, simulate_trial, ChainConfig, LyapunovEstimate,
    ProductAccumulator,
};
pub use theory::{collapse_depth, gradient_growth_rate, theory_ratio_rate, theory_spectrum, RateSource};
