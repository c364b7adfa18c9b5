use crate::linalg::Matrix;

/// Householder QR of a square or tall matrix: `a = q * r` with `q` of shape
/// `rows x cols` (orthonormal columns) and `r` upper triangular `cols x cols`.
pub fn householder_qr(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = a.shape();
    assert!(m >= n, "householder_qr needs rows >= cols");
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        v[0] += if v[0] >= 0.0 { norm } else { -norm };
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        for j in k..n {
            let proj = 2.0 * (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() / vnorm_sq;
            for i in k..m {
                r[(i, j)] -= proj * v[i - k];
            }
        }
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
    let mut q = Matrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        for j in 0..n {
            let proj = 2.0 * (k..m).map(|i| v[i - k] * q[(i, j)]).sum::<f64>() / vnorm_sq;
            for i in k..m {
                q[(i, j)] -= proj * v[i - k];
            }
        }
    }
    let r = Matrix::from_fn(n, n, |i, j| if i <= j { r[(i, j)] } else { 0.0 });
    (q, r)
}
