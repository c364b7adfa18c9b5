//! Numerical rank and Jacobian-spectrum diagnostics for layered networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense matrices, a one-sided Jacobi SVD, tolerance-based
//!   numerical rank, Weyl perturbation budgets, PCA dimension and an
//!   elimination-based exact-rank oracle.
//! - [`net`]: a small layered-network model (dense, activations, layer
//!   normalization, residual blocks) with analytic Jacobians and partial
//!   (column-probed) Jacobians.
//! - [`diagnostics`]: rank sweeps, classification dimension, perturbed PCA
//!   dimension, structural probes, the linear-chain experiment and the
//!   rank-deficiency probability estimator.
//! - [`lyapunov`]: Lyapunov spectra of Gaussian matrix products, the closed
//!   form via the digamma function and collapse-depth prediction.
//! - [`deficit`]: the pinned-coefficient Lasso for linear dependencies among logits.
//! - [`io`]: CSV and JSON formats used by the command-line runner.
//!
//! All computations are deterministic functions of their inputs and seeds.

pub mod deficit;
pub mod diagnostics;
mod error;
pub mod io;
pub mod linalg;
pub mod lyapunov;
pub mod net;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{Matrix, ToleranceSpec};
