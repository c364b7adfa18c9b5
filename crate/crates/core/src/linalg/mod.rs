//! Dense linear algebra: matrices, SVD, numerical rank, perturbation budgets and PCA.

mod exact;
mod matrix;
mod pca;
mod qr;
mod rank;
mod svd;

pub use exact::{exact_rank, EXACT_RANK_LIMIT};
pub use matrix::Matrix;
pub use pca::{pca_dimension, pca_eigenvalues, principal_axes};
pub use rank::{
    numerical_rank, perturbation_budget, singular_values, SpectralSummary, Spectrum, ToleranceSpec,
    DEGENERATE_GUARD, FLOAT32_EPS,
};
pub(crate) use rank::count_above;
pub use qr::householder_qr;
pub use svd::Svd;
