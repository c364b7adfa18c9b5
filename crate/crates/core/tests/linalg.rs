use proptest::prelude::*;
use rankscope::linalg::{
    exact_rank, pca_dimension, perturbation_budget, singular_values, Matrix, SpectralSummary, ToleranceSpec,
};
use rankscope::rng::GaussianStream;
use rankscope::Error;
use rankscope_oracles::{reference_rank, reference_singular_values};

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    GaussianStream::new(seed).gaussian_matrix(rows, cols, 1.0)
}

#[test]
fn singular_values_match_reference_decomposition() {
    for (i, &(r, c)) in [(50, 30), (30, 50), (17, 17), (64, 3), (1, 9)].iter().enumerate() {
        let m = gaussian(r, c, 100 + i as u64);
        let ours = singular_values(&m).unwrap().singular_values;
        let reference = reference_singular_values(&m.to_rows());
        assert_eq!(ours.len(), r.min(c));
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-10 * b, "{r}x{c}: {a} vs {b}");
        }
    }
}

#[test]
fn graded_matrix_keeps_relative_accuracy() {
    // Columns scaled over 24 decades; every singular value is one of the scales.
    let scales: Vec<f64> = (0..7).map(|k| 10f64.powi(-4 * k)).collect();
    let q = {
        let g = gaussian(7, 7, 3);
        rankscope::linalg::householder_qr(&g).0
    };
    let m = Matrix::from_fn(7, 7, |i, j| q[(i, j)] * scales[j]);
    let s = singular_values(&m).unwrap().singular_values;
    for (got, want) in s.iter().zip(&scales) {
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }
}

#[test]
fn frobenius_identity_for_seeded_gaussian() {
    let m = gaussian(50, 30, 7);
    let s = singular_values(&m).unwrap().singular_values;
    let direct: f64 = m.as_slice().iter().map(|x| x * x).sum();
    let from_svd: f64 = s.iter().map(|x| x * x).sum();
    assert!((direct - from_svd).abs() <= 1e-10 * direct);
}

#[test]
fn non_finite_input_is_rejected() {
    let mut m = Matrix::identity(3);
    m[(1, 2)] = f64::NAN;
    assert!(matches!(singular_values(&m), Err(Error::NonFinite { row: 1, col: 2 })));
}

#[test]
fn numerical_rank_agrees_with_reference() {
    let mut g = GaussianStream::new(11);
    for case in 0..40 {
        let rank = 1 + case % 6;
        let a = g.gaussian_matrix(9, rank, 1.0);
        let b = g.gaussian_matrix(rank, 8, 1.0);
        let noise = g.gaussian_matrix(9, 8, 1e-9);
        let m = a.matmul(&b).unwrap().add(&noise).unwrap();
        let tol = ToleranceSpec::relative(1e-6).unwrap();
        let summary = SpectralSummary::compute(&m, tol).unwrap();
        assert_eq!(summary.numerical_rank, rank);
        assert_eq!(summary.numerical_rank, reference_rank(&m.to_rows(), 1e-6));
    }
}

#[test]
fn exact_rank_of_product_with_rank_four_factor() {
    let mut g = GaussianStream::new(21);
    let a = g.gaussian_matrix(10, 10, 1.0);
    let mut b = Matrix::zeros(10, 10);
    for _ in 0..4 {
        let u = g.gaussian_vec(10, 1.0);
        let v = g.gaussian_vec(10, 1.0);
        b = b.add(&Matrix::outer(&u, &v)).unwrap();
    }
    assert_eq!(exact_rank(&b, 1e-10).unwrap(), 4);
    assert_eq!(exact_rank(&a.matmul(&b).unwrap(), 1e-10).unwrap(), 4);
}

#[test]
fn exact_rank_limits() {
    assert!(matches!(exact_rank(&Matrix::zeros(65, 70), 1e-10), Err(Error::Scale { .. })));
    assert_eq!(exact_rank(&Matrix::zeros(70, 64), 1e-10).unwrap(), 0);
}

/// Smallest grid point in `(0, upper]` at which the rank of `w + delta * d` differs
/// from the rank of `w`, refined by bisection; `None` when the rank never moves.
fn first_rank_change(w: &Matrix, d: &Matrix, epsilon: f64, upper: f64) -> Option<f64> {
    let base = reference_rank(&w.to_rows(), epsilon);
    let changed = |delta: f64| reference_rank(&w.add_scaled(d, delta).unwrap().to_rows(), epsilon) != base;
    let steps = 4000;
    let hit = (1..=steps).map(|i| upper * i as f64 / steps as f64).find(|&delta| changed(delta))?;
    let (mut lo, mut hi) = (hit - upper / steps as f64, hit);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if changed(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[test]
fn budget_examples_agree_with_grid_search() {
    let w = Matrix::from_diag(&[1.0, 0.5]);
    let budget = perturbation_budget(&w, &Matrix::identity(2), 0.25).unwrap();
    assert!((budget - 0.2).abs() < 1e-14);
    // identity perturbation never changes this rank; the bound is for the worst direction
    assert_eq!(first_rank_change(&w, &Matrix::identity(2), 0.25, 2.0), None);
    let worst = first_rank_change(&w, &Matrix::from_diag(&[1.0, -1.0]), 0.25, 2.0).unwrap();
    assert!((worst - 0.2).abs() < 1e-9, "{worst}");

    let w = Matrix::from_diag(&[1.0, 0.0]);
    let budget = perturbation_budget(&w, &Matrix::identity(2), 0.5).unwrap();
    assert!((budget - 1.0 / 3.0).abs() < 1e-14);
    let along_identity = first_rank_change(&w, &Matrix::identity(2), 0.5, 2.0).unwrap();
    assert!((along_identity - 1.0).abs() < 1e-9, "{along_identity}");
    let worst = first_rank_change(&w, &Matrix::from_diag(&[-1.0, 1.0]), 0.5, 2.0).unwrap();
    assert!((worst - 1.0 / 3.0).abs() < 1e-9, "{worst}");
}

#[test]
fn zero_matrix_budget_and_degenerate_guard() {
    let zero = Matrix::zeros(3, 3);
    assert_eq!(perturbation_budget(&zero, &Matrix::identity(3), 0.5).unwrap(), 0.0);
    assert_eq!(perturbation_budget(&zero, &zero, 0.5).unwrap(), f64::INFINITY);
    let w = Matrix::from_diag(&[2.0, 1.0]);
    let near = 0.5 * (1.0 + 5e-13);
    assert!(matches!(perturbation_budget(&w, &Matrix::identity(2), near), Err(Error::DegenerateTolerance { .. })));
    assert!(perturbation_budget(&w, &Matrix::identity(2), 0.5 * (1.0 + 1e-11)).is_ok());
}

#[test]
fn pca_dimension_examples() {
    let tol = ToleranceSpec::float32(500).unwrap();
    // points on a line, shifted off the origin
    let line = Matrix::from_fn(40, 5, |i, j| (i as f64 - 3.0) * (j as f64 + 1.0) + 10.0 * j as f64);
    assert_eq!(pca_dimension(&line, tol).unwrap(), 1);

    let mut g = GaussianStream::new(5);
    let basis = g.gaussian_matrix(7, 32, 1.0);
    let coeffs = g.gaussian_matrix(500, 7, 1.0);
    let data = coeffs.matmul(&basis).unwrap();
    assert_eq!(pca_dimension(&data, tol).unwrap(), 7);

    let cloud = g.gaussian_matrix(2000, 16, 1.0);
    assert_eq!(pca_dimension(&cloud, ToleranceSpec::float32(2000).unwrap()).unwrap(), 16);

    let same = Matrix::from_fn(10, 4, |_, j| j as f64);
    assert_eq!(pca_dimension(&same, tol).unwrap(), 0);
    assert!(matches!(pca_dimension(&Matrix::zeros(1, 4), tol), Err(Error::SampleCount(1))));
}

fn small_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..7, 1usize..7, any::<u64>()).prop_map(|(r, c, seed)| gaussian(r, c, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transpose_preserves_singular_values(m in small_matrix()) {
        let a = singular_values(&m).unwrap().singular_values;
        let b = singular_values(&m.transpose()).unwrap().singular_values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * a[0]);
        }
    }

    #[test]
    fn spectra_are_sorted_and_conserve_energy(m in small_matrix()) {
        let s = singular_values(&m).unwrap().singular_values;
        prop_assert!(s.windows(2).all(|w| w[0] >= w[1]) && s.iter().all(|&x| x >= 0.0));
        let energy: f64 = s.iter().map(|x| x * x).sum();
        prop_assert!((energy - m.frobenius_norm_sq()).abs() <= 1e-10 * m.frobenius_norm_sq());
    }

    #[test]
    fn rank_is_scale_invariant(m in small_matrix(), log_scale in -20.0f64..20.0, eps in 1e-6f64..0.9) {
        let tol = ToleranceSpec::relative(eps).unwrap();
        let s = singular_values(&m).unwrap().singular_values;
        // skip tolerances sitting on a singular value ratio
        prop_assume!(s.iter().all(|v| ((v / s[0]) - eps).abs() > 1e-9));
        let scaled = m.scale(10f64.powf(log_scale));
        prop_assert_eq!(
            rankscope::linalg::numerical_rank(&m, tol).unwrap(),
            rankscope::linalg::numerical_rank(&scaled, tol).unwrap()
        );
    }

    #[test]
    fn pca_dimension_ignores_offsets(seed in any::<u64>(), rank in 1usize..5, shift in -1e3f64..1e3) {
        let mut g = GaussianStream::new(seed);
        let data = g.gaussian_matrix(30, rank, 1.0).matmul(&g.gaussian_matrix(rank, 6, 1.0)).unwrap();
        let offset = g.gaussian_vec(6, shift);
        let moved = Matrix::from_fn(30, 6, |i, j| data[(i, j)] + offset[j]);
        let tol = ToleranceSpec::float32(30).unwrap();
        prop_assert_eq!(pca_dimension(&data, tol).unwrap(), rank);
        prop_assert_eq!(pca_dimension(&moved, tol).unwrap(), rank);
    }

    #[test]
    fn exact_rank_is_submultiplicative(seed in any::<u64>(), ra in 1usize..6, rb in 1usize..6) {
        let mut g = GaussianStream::new(seed);
        let a = g.gaussian_matrix(6, ra, 1.0).matmul(&g.gaussian_matrix(ra, 6, 1.0)).unwrap();
        let b = g.gaussian_matrix(6, rb, 1.0).matmul(&g.gaussian_matrix(rb, 6, 1.0)).unwrap();
        let rank = |m: &Matrix| exact_rank(m, 1e-9).unwrap();
        prop_assert_eq!(rank(&a), ra);
        prop_assert_eq!(rank(&b), rb);
        prop_assert!(rank(&a.matmul(&b).unwrap()) <= ra.min(rb));
    }

    #[test]
    fn budget_preserves_rank(seed in any::<u64>(), log_eps in -6.0f64..-0.1, frac in 0.0f64..0.999) {
        let mut g = GaussianStream::new(seed);
        let w = g.gaussian_matrix(5, 4, 1.0);
        let d = g.gaussian_matrix(5, 4, 1.0);
        let eps = 10f64.powf(log_eps);
        let tol = ToleranceSpec::relative(eps).unwrap();
        match perturbation_budget(&w, &d, eps) {
            Ok(budget) => {
                let moved = w.add_scaled(&d, frac * budget).unwrap();
                prop_assert_eq!(
                    rankscope::linalg::numerical_rank(&moved, tol).unwrap(),
                    rankscope::linalg::numerical_rank(&w, tol).unwrap()
                );
            }
            Err(e) => prop_assert!(e.is_degenerate(), "unexpected error {}", e),
        }
    }
}
