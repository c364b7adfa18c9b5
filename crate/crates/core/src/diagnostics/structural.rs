use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, pca_dimension, Matrix, ToleranceSpec};
use crate::net::{Layer, LayerSpec};
use crate::rng::GaussianStream;

/// Stream index for the input batch, kept apart from weight streams.
const BATCH_STREAM: u64 = 0xBA7C_4000_0000_0001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralRecord {
    /// PCA dimension of the Gaussian input batch.
    pub dim_before: usize,
    /// PCA dimension of the component's outputs on that batch.
    pub dim_after: usize,
    /// Numerical rank of the component Jacobian at the first batch sample.
    pub jacobian_rank: usize,
    pub output_width: usize,
}

/// The standard-Gaussian input batch used by [`structural_probe`]; row 0 is the Jacobian sample.
pub fn structural_batch(width: usize, batch: usize, seed: u64) -> Matrix {
    GaussianStream::derived(seed, BATCH_STREAM).gaussian_matrix(batch, width, 1.0)
}

/// Measures how a single component changes feature dimension and Jacobian rank.
///
/// Weights of `component` are drawn with `seed` as master seed; the same
/// tolerance thresholds both the PCA eigenvalues and the Jacobian singular values.
pub fn structural_probe(
    component: &LayerSpec,
    width: usize,
    batch: usize,
    seed: u64,
    tol: ToleranceSpec,
) -> Result<StructuralRecord> {
    tol.validate()?;
    if batch < 2 {
        return Err(Error::SampleCount(batch));
    }
    let layer = Layer::from_spec(component, width, seed)?;
    let inputs = structural_batch(width, batch, seed);
    let outputs: Vec<Vec<f64>> = (0..batch).map(|t| layer.forward(inputs.row(t))).collect::<Result<_>>()?;
    let output_width = outputs[0].len();
    let outputs = Matrix::new(batch, output_width, outputs.concat())?;
    Ok(StructuralRecord {
        dim_before: pca_dimension(&inputs, tol)?,
        dim_after: pca_dimension(&outputs, tol)?,
        jacobian_rank: numerical_rank(&layer.jacobian(inputs.row(0))?, tol)?,
        output_width,
    })
}
