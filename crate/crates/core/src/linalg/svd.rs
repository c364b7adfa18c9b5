//! One-sided (Hestenes) Jacobi SVD.
//!
//! Tall inputs are first reduced to their `n x n` triangular factor by a
//! Householder QR; the singular values and right singular vectors of `R` equal
//! those of the input. Column pairs are rotated until every pair is orthogonal
//! to within `sqrt(m) * eps` relative to the column norms, which gives high
//! relative accuracy on the singular values.

use crate::error::Result;
use crate::linalg::Matrix;

const MAX_SWEEPS: usize = 80;

/// Singular values and (optionally) right singular vectors of a matrix.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Non-increasing, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    /// Orthogonal `cols x cols` matrix whose columns are the right singular
    /// vectors, ordered like `singular_values` (remaining columns span the null space).
    pub right_vectors: Option<Matrix>,
}

impl Svd {
    pub fn values_only(m: &Matrix) -> Result<Self> {
        m.check_finite()?;
        let values = if m.rows() >= m.cols() {
            decompose(m, false).0
        } else {
            decompose(&m.transpose(), false).0
        };
        Ok(Self { singular_values: values, right_vectors: None })
    }

    pub fn with_right_vectors(m: &Matrix) -> Result<Self> {
        m.check_finite()?;
        let (values, v) = decompose(m, true);
        Ok(Self { singular_values: values, right_vectors: v })
    }
}

/// Column-major working copy of a matrix.
struct Columns {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl Columns {
    fn from_matrix(a: &Matrix, scale: f64) -> Self {
        let (m, n) = a.shape();
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for (j, &v) in a.row(i).iter().enumerate() {
                data[j * m + i] = v * scale;
            }
        }
        Self { m, n, data }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.m);
        (&mut head[p * self.m..(p + 1) * self.m], &mut tail[..self.m])
    }

    /// Replaces `self` by the `n x n` upper-triangular factor of its Householder QR.
    fn reduce_to_triangle(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut v = vec![0.0; m];
        for k in 0..n {
            let x = &self.col(k)[k..];
            let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let len = m - k;
            v[..len].copy_from_slice(x);
            v[0] -= alpha;
            let vnorm_sq: f64 = v[..len].iter().map(|t| t * t).sum();
            if vnorm_sq == 0.0 {
                continue;
            }
            for j in k..n {
                let col = &mut self.data[j * m + k..(j + 1) * m];
                let proj = 2.0 * dot4(&v[..len], col) / vnorm_sq;
                for (c, &vi) in col.iter_mut().zip(&v[..len]) {
                    *c -= proj * vi;
                }
            }
        }
        let mut r = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                r[j * n + i] = self.data[j * m + i];
            }
        }
        self.m = n;
        self.data = r;
    }
}

fn decompose(a: &Matrix, want_v: bool) -> (Vec<f64>, Option<Matrix>) {
    let max_abs = a.max_abs();
    let k = a.rows().min(a.cols());
    let n = a.cols();
    if max_abs == 0.0 {
        return (vec![0.0; k], want_v.then(|| Matrix::identity(n)));
    }
    let scale = 1.0 / max_abs;
    let mut cols = Columns::from_matrix(a, scale);
    if cols.m > cols.n {
        cols.reduce_to_triangle();
    }
    let mut v = want_v.then(|| {
        let mut id = vec![0.0; n * n];
        for j in 0..n {
            id[j * n + j] = 1.0;
        }
        Columns { m: n, n, data: id }
    });
    jacobi_sweeps(&mut cols, v.as_mut());

    let mut order: Vec<(f64, usize)> = (0..cols.n).map(|j| (dot4(cols.col(j), cols.col(j)).sqrt(), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let values = order.iter().take(k).map(|&(s, _)| s * max_abs).collect();
    let v = v.map(|v| Matrix::from_fn(n, n, |i, j| v.col(order[j].1)[i]));
    (values, v)
}

fn jacobi_sweeps(a: &mut Columns, mut v: Option<&mut Columns>) {
    let n = a.n;
    let tol = f64::EPSILON * (a.m as f64).sqrt();
    let mut norms: Vec<f64> = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        for (j, norm) in norms.iter_mut().enumerate() {
            *norm = dot4(a.col(j), a.col(j));
        }
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot4(a.col(p), a.col(q));
                if gamma.abs() <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (ap, aq) = a.pair_mut(p, q);
                rotate(ap, aq, c, s);
                if let Some(v) = v.as_deref_mut() {
                    let (vp, vq) = v.pair_mut(p, q);
                    rotate(vp, vq, c, s);
                }
                norms[p] = (alpha - t * gamma).max(0.0);
                norms[q] = beta + t * gamma;
            }
        }
        if !rotated {
            break;
        }
    }
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Dot product with four independent accumulators.
#[inline]
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn values(m: &Matrix) -> Vec<f64> {
        Svd::values_only(m).unwrap().singular_values
    }

    #[test]
    fn diagonal_and_rank_one() {
        assert_eq!(values(&Matrix::from_diag(&[3.0, 1.0, 2.0])), vec![3.0, 2.0, 1.0]);
        let ones = values(&Matrix::from_fn(2, 2, |_, _| 1.0));
        assert!((ones[0] - 2.0).abs() < 1e-15);
        assert!(ones[1].abs() < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(values(&Matrix::zeros(3, 2)), vec![0.0, 0.0]);
    }

    #[test]
    fn right_vectors_reconstruct() {
        let mut g = GaussianStream::new(5);
        for &(r, c) in &[(7, 4), (4, 7), (5, 5)] {
            let a = g.gaussian_matrix(r, c, 1.0);
            let svd = Svd::with_right_vectors(&a).unwrap();
            let v = svd.right_vectors.unwrap();
            // V is orthogonal
            let vtv = v.transpose().matmul(&v).unwrap();
            assert!(vtv.max_abs_diff(&Matrix::identity(c)) < 1e-13);
            // ||A v_j|| = sigma_j
            let av = a.matmul(&v).unwrap();
            for (j, s) in svd.singular_values.iter().enumerate() {
                let norm = av.column(j).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - s).abs() < 1e-12 * svd.singular_values[0], "{r}x{c} col {j}");
            }
        }
    }
}
