use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest `min(rows, cols)` accepted by [`exact_rank`].
pub const EXACT_RANK_LIMIT: usize = 64;

/// Rank by Gaussian elimination with partial pivoting.
///
/// A column contributes a pivot when its largest remaining entry is at least
/// `pivot_tol` times the largest entry of the original matrix. Intended as a
/// test oracle for small matrices, independent of the SVD path.
pub fn exact_rank(m: &Matrix, pivot_tol: f64) -> Result<usize> {
    let size = m.rows().min(m.cols());
    if size > EXACT_RANK_LIMIT {
        return Err(Error::Scale { size, limit: EXACT_RANK_LIMIT });
    }
    if !(pivot_tol.is_finite() && pivot_tol > 0.0) {
        return Err(Error::InvalidInput(format!("pivot tolerance must be positive, got {pivot_tol}")));
    }
    m.check_finite()?;
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(0);
    }
    let threshold = pivot_tol * scale;
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (pivot_row, pivot_abs) = (rank..rows)
            .map(|i| (i, a[(i, col)].abs()))
            .fold((rank, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < threshold {
            continue;
        }
        if pivot_row != rank {
            for j in 0..cols {
                let tmp = a[(rank, j)];
                a[(rank, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
            }
        }
        let pivot = a[(rank, col)];
        for i in rank + 1..rows {
            let factor = a[(i, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..cols {
                a[(i, j)] -= factor * a[(rank, j)];
            }
        }
        rank += 1;
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    #[test]
    fn basic_cases() {
        let uv = Matrix::outer(&[1.0, -2.0, 0.5], &[3.0, 1.0, 4.0, -1.0]);
        assert_eq!(exact_rank(&uv, 1e-9).unwrap(), 1);
        assert_eq!(exact_rank(&Matrix::identity(8), 1e-9).unwrap(), 8);
        assert_eq!(exact_rank(&Matrix::zeros(3, 3), 1e-9).unwrap(), 0);
    }

    #[test]
    fn product_with_rank_four_factor() {
        let mut g = GaussianStream::new(21);
        let a = g.gaussian_matrix(10, 10, 1.0);
        let mut b = Matrix::zeros(10, 10);
        for _ in 0..4 {
            let u = g.gaussian_vec(10, 1.0);
            let v = g.gaussian_vec(10, 1.0);
            b = b.add(&Matrix::outer(&u, &v)).unwrap();
        }
        assert_eq!(exact_rank(&b, 1e-9).unwrap(), 4);
        assert_eq!(exact_rank(&a.matmul(&b).unwrap(), 1e-9).unwrap(), 4);
    }

    #[test]
    fn oversize_is_rejected() {
        assert!(matches!(exact_rank(&Matrix::zeros(65, 65), 1e-9), Err(Error::Scale { .. })));
        assert!(exact_rank(&Matrix::zeros(65, 3), 1e-9).is_ok());
    }
}
