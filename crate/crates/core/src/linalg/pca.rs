use crate::error::{Error, Result};
use crate::linalg::rank::count_above;
use crate::linalg::{Matrix, Svd, ToleranceSpec};

fn centered(data: &Matrix) -> Result<Matrix> {
    let (n, d) = data.shape();
    if n < 2 {
        return Err(Error::SampleCount(n));
    }
    data.check_finite()?;
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(data.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    Ok(Matrix::from_fn(n, d, |i, j| data[(i, j)] - mean[j]))
}

/// Sample-covariance eigenvalues (unbiased divisor), sorted descending.
///
/// Computed from the SVD of the centered data, `lambda_i = sigma_i^2 / (N - 1)`;
/// the list has `min(N, D)` entries.
pub fn pca_eigenvalues(data: &Matrix) -> Result<Vec<f64>> {
    let n = data.rows();
    let c = centered(data)?;
    let s = Svd::values_only(&c)?.singular_values;
    Ok(s.iter().map(|v| v * v / (n - 1) as f64).collect())
}

/// Covariance eigenvalues with the full orthonormal set of principal axes
/// (columns of a `D x D` matrix, ordered by descending eigenvalue).
pub fn principal_axes(data: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = data.rows();
    let c = centered(data)?;
    let svd = Svd::with_right_vectors(&c)?;
    let values = svd.singular_values.iter().map(|v| v * v / (n - 1) as f64).collect();
    Ok((values, svd.right_vectors.expect("requested right vectors")))
}

/// Number of covariance eigenvalues at or above `epsilon * largest eigenvalue`.
///
/// `data` holds one sample per row. Returns 0 when all samples coincide.
pub fn pca_dimension(data: &Matrix, tol: ToleranceSpec) -> Result<usize> {
    tol.validate()?;
    Ok(count_above(&pca_eigenvalues(data)?, tol.epsilon()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_with_offset() {
        let data = Matrix::from_fn(20, 3, |i, j| (i as f64 - 7.0) * [1.0, -2.0, 0.5][j] + [5.0, 1.0, -3.0][j]);
        assert_eq!(pca_dimension(&data, ToleranceSpec::float32(3).unwrap()).unwrap(), 1);
    }

    #[test]
    fn identical_samples_and_too_few() {
        let data = Matrix::from_fn(5, 4, |_, j| j as f64);
        assert_eq!(pca_dimension(&data, ToleranceSpec::float32(4).unwrap()).unwrap(), 0);
        let one = Matrix::from_fn(1, 4, |_, j| j as f64);
        assert!(matches!(pca_dimension(&one, ToleranceSpec::float32(4).unwrap()), Err(Error::SampleCount(1))));
    }

    #[test]
    fn eigenvalues_match_covariance_diagonal() {
        // two uncorrelated axes with sample variances 4 and 1
        let xs = [-2.0, 2.0, -2.0, 2.0];
        let ys = [-1.0, -1.0, 1.0, 1.0];
        let data = Matrix::from_fn(4, 2, |i, j| if j == 0 { xs[i] } else { ys[i] });
        let ev = pca_eigenvalues(&data).unwrap();
        assert!((ev[0] - 16.0 / 3.0).abs() < 1e-12);
        assert!((ev[1] - 4.0 / 3.0).abs() < 1e-12);
    }
}
