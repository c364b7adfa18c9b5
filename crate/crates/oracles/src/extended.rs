//! Double-double ("twofloat") products and singular values.
//!
//! Products of many Gaussian factors have singular values spread over far more
//! than 16 decades, so neither the explicit product nor its SVD can be formed in
//! `f64`. Carrying about 32 significant digits keeps the smallest singular value
//! of the test-sized products accurate to well below `1e-8` relative.

use twofloat::TwoFloat;

type Wide = TwoFloat;

fn wide(x: f64) -> Wide {
    TwoFloat::from(x)
}

/// `G_L ... G_1` in double-double, where `factors[0]` is applied first.
/// Each factor is `n x n`, row-major.
pub fn extended_product(factors: &[Vec<f64>], n: usize) -> Vec<Wide> {
    let mut acc: Vec<Wide> = (0..n * n).map(|k| wide(if k / n == k % n { 1.0 } else { 0.0 })).collect();
    for g in factors {
        assert_eq!(g.len(), n * n, "factor shape");
        let mut next = vec![wide(0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut sum = wide(0.0);
                for k in 0..n {
                    sum += acc[k * n + j] * g[i * n + k];
                }
                next[i * n + j] = sum;
            }
        }
        acc = next;
    }
    acc
}

/// Singular values of an `n x n` double-double matrix by one-sided Jacobi, descending.
pub fn extended_singular_values(a: &[Wide], n: usize) -> Vec<Wide> {
    // column-major working copy
    let mut cols: Vec<Vec<Wide>> = (0..n).map(|j| (0..n).map(|i| a[i * n + j]).collect()).collect();
    let dot = |x: &[Wide], y: &[Wide]| x.iter().zip(y).fold(wide(0.0), |s, (p, q)| s + *p * *q);
    let tol = 1e-30;
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= (alpha * beta).sqrt() * tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma * 2.0);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = wide(sign) / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
                let c = wide(1.0) / (t * t + 1.0).sqrt();
                let s = c * t;
                let (head, tail) = cols.split_at_mut(q);
                for (x, y) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut values: Vec<Wide> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    values.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    values
}

/// `log sigma_k` of the product of `factors` (applied in order), descending.
pub fn log_singular_values_of_product(factors: &[Vec<f64>], n: usize) -> Vec<f64> {
    let product = extended_product(factors, n);
    // rescale so the double-double exponent range is never an issue
    let scale = product.iter().map(|v| v.hi().abs()).fold(0.0, f64::max);
    let scaled: Vec<Wide> = product.iter().map(|&v| v / scale).collect();
    extended_singular_values(&scaled, n).iter().map(|s| s.hi().ln() + scale.ln()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_product() {
        let d1 = vec![2.0, 0.0, 0.0, 1e-10];
        let d2 = vec![3.0, 0.0, 0.0, 1e-12];
        let logs = log_singular_values_of_product(&[d1, d2], 2);
        assert!((logs[0] - 6f64.ln()).abs() < 1e-14);
        assert!((logs[1] - 1e-22f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rotation_matrix_has_unit_values() {
        let (c, s) = (0.6, 0.8);
        let logs = log_singular_values_of_product(&vec![vec![c, -s, s, c]; 5], 2);
        assert!(logs.iter().all(|l| l.abs() < 1e-14));
    }
}
