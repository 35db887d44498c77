use std::sync::Arc;

use lowrank::bounds::{
    gauss_deviation_simple, gauss_mean_frobenius, gauss_mean_spectral, intro_deviation_bound, intro_mean_bound,
    intro_power_bound, power_scheme_bound, SpectrumView,
};
use lowrank::factor::{column_id, direct_svd, BasisChoice, SampleBundle};
use lowrank::io::{binary, parse_matrix_market, streamed_bundle, RowBlockStream};
use lowrank::linalg::{
    adjoint_mismatch, dense_operator, householder_qr, least_squares, pivoted_qr, singular_values, small_svd, Counted,
    FnOperator, Scaled,
};
use lowrank::matrix::orthonormality_defect;
use lowrank::oracle::{exact_projection_error, jacobi_eigenvalues, synthetic_matrix, SpectrumKind, SyntheticSpec};
use lowrank::rangefinder::{power_iteration_range, range_finder, AdaptiveState};
use lowrank::sketch::{gaussian_matrix, GsrftOperator, SketchSpec, SrftOperator};
use lowrank::{c64, Matrix, Norm, RealScalar, Scalar};
use proptest::prelude::*;

fn f<R: RealScalar>(x: R) -> f64 {
    x.as_f64()
}

fn dims(max: usize) -> impl Strategy<Value = (usize, usize)> {
    (1..=max, 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn qr_orthonormal_and_reconstructs((m, n) in dims(64), seed in any::<u64>()) {
        let a: Matrix<f64> = gaussian_matrix(m, n, seed);
        let qr = householder_qr(&a);
        let cols = qr.q.ncols() as f64;
        prop_assert!(f(orthonormality_defect(&qr.q)) <= 1e-12 * cols);
        prop_assert!((&qr.q.matmul(&qr.r) - &a).fro_norm() <= 1e-12 * a.fro_norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn complex_qr((m, n) in dims(40), seed in any::<u64>()) {
        let a: Matrix<c64> = gaussian_matrix(m, n, seed);
        let qr = householder_qr(&a);
        prop_assert!(f(orthonormality_defect(&qr.q)) <= 1e-12 * qr.q.ncols() as f64);
        prop_assert!(f((&qr.q.matmul(&qr.r) - &a).fro_norm()) <= 1e-12 * f(a.fro_norm()));
        for j in 0..qr.r.nrows().min(qr.r.ncols()) {
            prop_assert!(qr.r[(j, j)].im() == 0.0 && qr.r[(j, j)].re() >= 0.0);
        }
    }

    #[test]
    fn svd_matches_jacobi_eigenvalues(seed in any::<u64>()) {
        let a: Matrix<f64> = gaussian_matrix(10, 7, seed);
        let s = small_svd(&a).unwrap();
        let mut lam = jacobi_eigenvalues(&a.adjoint_matmul(&a)).unwrap();
        lam.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (sv, l) in s.sigma.iter().zip(&lam) {
            prop_assert!((sv - l.max(0.0).sqrt()).abs() <= 1e-9 * s.sigma[0]);
        }
        prop_assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(orthonormality_defect(&s.u) <= 1e-11 && orthonormality_defect(&s.v) <= 1e-11);
    }

    #[test]
    fn pivoted_profile_decreases((m, n) in dims(30), rank in 1usize..30, seed in any::<u64>()) {
        let r = rank.min(m).min(n);
        let a: Matrix<f64> = gaussian_matrix(m, r, seed).matmul(&gaussian_matrix(r, n, seed ^ 1));
        let p = pivoted_qr(&a, None);
        let d: Vec<f64> = p.diag_profile.clone();
        prop_assert!(d.windows(2).all(|w| w[0] + 1e-12 * d[0] >= w[1]));
    }

    #[test]
    fn least_squares_is_stationary(m in 2usize..30, n in 1usize..10, seed in any::<u64>()) {
        prop_assume!(n <= m);
        let a: Matrix<f64> = gaussian_matrix(m, n, seed);
        let b: Matrix<f64> = gaussian_matrix(m, 3, seed ^ 7);
        let x = least_squares(&a, &b).unwrap();
        let g = a.adjoint_matmul(&(&a.matmul(&x) - &b));
        prop_assert!(g.fro_norm() <= 1e-10 * a.fro_norm() * b.fro_norm());
    }

    #[test]
    fn operator_wrappers_are_adjoint_consistent((m, n) in dims(30), seed in any::<u64>()) {
        let a: Matrix<c64> = gaussian_matrix(m, n, seed);
        prop_assert!(adjoint_mismatch(&a, seed) <= 1e-13);
        prop_assert!(adjoint_mismatch(&dense_operator(&a), seed) <= 1e-13);
        prop_assert!(adjoint_mismatch(&Counted::new(a.clone()), seed) <= 1e-13);
        let scaled = Scaled { inner: a.clone(), factor: -2.5 };
        prop_assert!(adjoint_mismatch(&scaled, seed) <= 1e-13);
        let at = a.adjoint();
        let op = FnOperator::new(m, n, |x: &Matrix<c64>| a.matmul(x), |y: &Matrix<c64>| at.matmul(y));
        prop_assert!(adjoint_mismatch(&op, seed) <= 1e-13);
    }

    #[test]
    fn structured_sketches_are_scaled_isometries(n in 2usize..96, frac in 0.05f64..1.0, seed in any::<u64>()) {
        let ell = ((n as f64 * frac) as usize).clamp(1, n);
        let unit = (ell as f64 / n as f64).sqrt();
        let s = SrftOperator::<f64>::new(n, ell, seed).unwrap().dense().scale_real(unit);
        prop_assert!(orthonormality_defect(&s) <= 1e-10);
        let g = GsrftOperator::<f64>::new(n, ell, seed).unwrap().dense().scale_real(unit);
        prop_assert!(orthonormality_defect(&g) <= 1e-10);
    }

    #[test]
    fn fast_sketch_matches_dense(n in 2usize..96, m in 1usize..6, seed in any::<u64>()) {
        let ell = n.min(7);
        let a: Matrix<f64> = gaussian_matrix(m, n, seed);
        let op = SrftOperator::<f64>::new(n, ell, seed).unwrap();
        let dense = a.to_complex().matmul(&op.dense());
        prop_assert!((&op.apply(&a).unwrap() - &dense).max_abs() <= 1e-11 * dense.max_abs().max(1.0));
        let op = GsrftOperator::<f64>::new(n, ell, seed).unwrap();
        let dense = a.to_complex().matmul(&op.dense());
        prop_assert!((&op.apply(&a).unwrap() - &dense).max_abs() <= 1e-11 * dense.max_abs().max(1.0));
    }

    #[test]
    fn generators_are_pure((n, ell) in dims(20), seed in any::<u64>()) {
        prop_assert_eq!(gaussian_matrix::<c64>(n, ell, seed), gaussian_matrix::<c64>(n, ell, seed));
        let ell = ell.min(n);
        prop_assert_eq!(SrftOperator::<f64>::new(n, ell, seed).unwrap().dense(), SrftOperator::<f64>::new(n, ell, seed).unwrap().dense());
    }
}

fn decaying(m: usize, n: usize, rho: f64, seed: u64) -> (Matrix<f64>, SpectrumView) {
    synthetic_matrix(&SyntheticSpec::new(m, n, SpectrumKind::ExpDecay { rho }, seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn range_basis_is_orthonormal((m, n) in dims(40), frac in 0.1f64..1.0, q in 0usize..3, seed in any::<u64>()) {
        let (a, _) = decaying(m, n, 0.8, seed);
        let ell = ((m.min(n) as f64 * frac) as usize).max(1);
        let b = range_finder(&a, &SketchSpec { kind: lowrank::sketch::SketchKind::Gaussian, ell, power_q: q, seed }).unwrap();
        prop_assert!(f(orthonormality_defect(&b.q)) <= 1e-11 * b.q.ncols().max(1) as f64);
        prop_assert_eq!(b.passes, 2 * q as u64 + 1);
    }

    #[test]
    fn adaptive_residual_never_grows(seed in any::<u64>(), rho in 0.5f64..0.95) {
        let (a, _) = decaying(30, 25, rho, seed);
        let mut st = AdaptiveState::new(&a, 5, seed).unwrap();
        let mut prev = f64::INFINITY;
        for _ in 0..15 {
            st.step();
            let e = exact_projection_error(&a, &st.basis(), Norm::Spectral).unwrap();
            prop_assert!(e <= prev * (1.0 + 1e-10) + 1e-14);
            prev = e;
        }
    }

    #[test]
    fn power_scheme_inequality(seed in any::<u64>(), q in 1usize..3, ell in 2usize..10) {
        let (a, _) = decaying(30, 30, 0.7, seed);
        let basis = power_iteration_range(&a, ell, q, seed).unwrap();
        let mut b = a.clone();
        for _ in 0..q {
            b = a.matmul(&a.adjoint_matmul(&b));
        }
        let lhs = exact_projection_error(&a, &basis.q, Norm::Spectral).unwrap();
        let rhs = exact_projection_error(&b, &basis.q, Norm::Spectral).unwrap().powf(1.0 / (2 * q + 1) as f64);
        prop_assert!(lhs <= rhs * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn direct_svd_error_equals_basis_residual(seed in any::<u64>(), ell in 1usize..15) {
        let (a, _) = decaying(30, 20, 0.7, seed);
        let q = range_finder(&a, &SketchSpec::gaussian(ell, seed)).unwrap().q;
        let svd = direct_svd(&a, &q).unwrap();
        let err = singular_values(&(&a - &svd.reconstruct())).unwrap()[0];
        let res = exact_projection_error(&a, &q, Norm::Spectral).unwrap();
        prop_assert!((err - res).abs() <= 1e-11 * res.max(1e-300) + 1e-14);
        prop_assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn id_coefficients_bounded(seed in any::<u64>(), k in 1usize..10) {
        let (a, _) = decaying(15, 30, 0.6, seed);
        let id = column_id(&a, k).unwrap();
        prop_assert!(id.max_coefficient() <= 2.0 + 1e-12);
        for (c, &j) in id.j.iter().enumerate() {
            for r in 0..id.rank() {
                prop_assert_eq!(id.x[(r, j)], if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn bounds_dominate_the_optimum(seed in any::<u64>(), k in 1usize..10, p in 4usize..8, q in 0usize..3) {
        let (_, view) = decaying(40, 30, 0.5 + (seed % 40) as f64 / 100.0, seed);
        let opt = view.next(k);
        prop_assert!(gauss_mean_spectral(k, p, &view).unwrap() >= opt);
        prop_assert!(gauss_mean_frobenius(k, p, &view).unwrap() >= view.tail_fro(k) * (1.0 - 1e-12));
        prop_assert!(gauss_deviation_simple(k, p, &view).unwrap().value >= opt);
        prop_assert!(power_scheme_bound(k, p, q, &view).unwrap() >= opt);
        prop_assert!(intro_mean_bound(k, p, &view).unwrap() >= gauss_mean_spectral(k, p, &view).unwrap() * (1.0 - 1e-12));
        prop_assert!(intro_deviation_bound(k, p, &view).unwrap().value >= opt);
        if k >= 2 {
            prop_assert!(intro_power_bound(k, q, &view).unwrap() >= opt);
        }
    }

    #[test]
    fn synthetic_spectrum_is_ground_truth((m, n) in dims(25), seed in any::<u64>()) {
        let (a, view) = decaying(m, n, 0.8, seed);
        let s = singular_values(&a).unwrap();
        for (x, y) in s.iter().zip(&view.sigma) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn binary_round_trip((m, n) in dims(12), seed in any::<u64>()) {
        let a: Matrix<c64> = gaussian_matrix(m, n, seed);
        let mut buf = Vec::new();
        binary::write_binary_to(&mut buf, &a).unwrap();
        prop_assert_eq!(binary::read_binary_from::<c64, _>(&mut buf.as_slice()).unwrap(), a.clone());
        let mut mm = Vec::new();
        lowrank::io::mm::write_matrix_market_to(&mut mm, &a).unwrap();
        let b: Matrix<c64> = parse_matrix_market(mm.as_slice()).unwrap();
        prop_assert!((&b - &a).max_abs() <= 1e-15 * a.max_abs());
    }

    #[test]
    fn streamed_bundle_matches_in_memory(m in 2usize..30, n in 2usize..20, block in 1usize..9, seed in any::<u64>()) {
        let a: Matrix<f64> = gaussian_matrix(m, n, seed);
        let ell = 2.min(n);
        let mut s = RowBlockStream::from_matrix(Arc::new(a.clone()), block).unwrap();
        let streamed = streamed_bundle(&mut s, ell, Some(ell), seed, BasisChoice::Orthonormalize).unwrap();
        let direct = SampleBundle::two_sided(&a, ell, ell, seed, BasisChoice::Orthonormalize).unwrap();
        prop_assert_eq!(&streamed.omega, &direct.omega);
        prop_assert!((&streamed.y - &direct.y).max_abs() <= 1e-13 * direct.y.max_abs());
        let (yt, dt) = (streamed.y_tilde.unwrap(), direct.y_tilde.unwrap());
        prop_assert!((&yt - &dt).max_abs() <= 1e-13 * dt.max_abs());
        let rows: usize = RowBlockStream::from_matrix(Arc::new(a), block).unwrap().map(|b| b.unwrap().1.nrows()).sum();
        prop_assert_eq!(rows, m);
    }
}
