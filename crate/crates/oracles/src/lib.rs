//! Reference computations for the rankscope test suites.
//!
//! Everything here is deliberately independent of the library under test:
//! matrices are plain row lists, decompositions come from `nalgebra` or from a
//! double-double Jacobi iteration, and derivatives from finite differences.

mod extended;

pub use extended::{extended_product, extended_singular_values, log_singular_values_of_product};

use nalgebra::{DMatrix, DVector};

fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let cols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Singular values (descending) from `nalgebra`'s bidiagonal SVD.
pub fn reference_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut s: Vec<f64> = to_dmatrix(rows).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `#{sigma_i >= epsilon * sigma_1}` using [`reference_singular_values`].
pub fn reference_rank(rows: &[Vec<f64>], epsilon: f64) -> usize {
    let s = reference_singular_values(rows);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v >= epsilon * top).count(),
        _ => 0,
    }
}

/// Central-difference Jacobian `d f_i / d x_j` with step `h`.
pub fn central_difference_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let mut columns = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let plus = f(&probe);
        probe[j] = x[j] - h;
        let minus = f(&probe);
        probe[j] = x[j];
        columns.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>());
    }
    let outputs = columns.first().map_or(0, Vec::len);
    (0..outputs).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
}

/// Minimizer of `sum_t (z_{t,target} - sum_{j != target} w_j z_{t,j})^2`, returned
/// as a full coefficient vector with `-1` at `target`, from the normal equations.
pub fn pinned_least_squares(rows: &[Vec<f64>], target: usize) -> Vec<f64> {
    let z = to_dmatrix(rows);
    let free: Vec<usize> = (0..z.ncols()).filter(|&j| j != target).collect();
    let design = DMatrix::from_fn(z.nrows(), free.len(), |i, k| z[(i, free[k])]);
    let response = DVector::from_fn(z.nrows(), |i, _| z[(i, target)]);
    let gram = design.transpose() * &design;
    let rhs = design.transpose() * response;
    let w = gram.cholesky().expect("normal equations must be positive definite").solve(&rhs);
    let mut out = vec![-1.0; z.ncols()];
    for (k, &j) in free.iter().enumerate() {
        out[j] = w[k];
    }
    out
}

/// Solution of the square system `a x = b` by LU with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let x = to_dmatrix(a).lu().solve(&DVector::from_column_slice(b)).expect("singular system");
    x.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_differences_of_a_quadratic() {
        let j = central_difference_jacobian(|x| vec![x[0] * x[1], x[1] * x[1]], &[2.0, 3.0], 1e-5);
        assert!((j[0][0] - 3.0).abs() < 1e-9 && (j[0][1] - 2.0).abs() < 1e-9);
        assert!(j[1][0].abs() < 1e-9 && (j[1][1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn least_squares_recovers_exact_combination() {
        let rows: Vec<Vec<f64>> = (0..6).map(|t| {
            let a = t as f64;
            let b = (t * t) as f64 - 2.0;
            vec![3.0 * a - b, a, b]
        }).collect();
        let w = pinned_least_squares(&rows, 0);
        assert!((w[1] - 3.0).abs() < 1e-10 && (w[2] + 1.0).abs() < 1e-10);
        assert_eq!(w[0], -1.0);
    }
}
