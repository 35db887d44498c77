//! Brute-force reference computations for checking randomized results.
//!
//! Nothing here calls into the range finders or the factorizations. The
//! only shared kernels are dense products and the small SVD.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{Norm, SpectrumView};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, small_svd};
use crate::prelude::*;
use crate::rng::{mix, stream};
use crate::sketch::{gaussian_matrix, gaussian_matrix_stream, haar_orthonormal};

/// `‖A - Q Q^* A‖` formed explicitly.
pub fn exact_projection_error<T: Scalar>(a: &Matrix<T>, q: &Matrix<T>, norm: Norm) -> Result<T::Real> {
    if a.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch(format!("A has {} rows, Q has {}", a.nrows(), q.nrows())));
    }
    let r = a - &q.matmul(&q.adjoint_matmul(a));
    Ok(match norm {
        Norm::Spectral => singular_values(&r)?.first().copied().unwrap_or_else(T::Real::zero),
        Norm::Frobenius => r.as_slice().iter().fold(T::Real::zero(), |s, z| s + z.modulus_sqr()).sqrt(),
    })
}

/// Smallest error of any rank-`j` approximation: `σ_{j+1}` or the tail root.
pub fn optimal_error<T: Scalar>(a: &Matrix<T>, j: usize, norm: Norm) -> Result<T::Real> {
    let s = singular_values(a)?;
    let tail = &s[j.min(s.len())..];
    Ok(match norm {
        Norm::Spectral => tail.first().copied().unwrap_or_else(T::Real::zero),
        Norm::Frobenius => tail.iter().fold(T::Real::zero(), |acc, &x| acc + x * x).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpectrumKind {
    /// `k` unit singular values, the rest zero.
    ExactRank { k: usize },
    /// `σ_j = j^{-alpha}`.
    PowerDecay { alpha: f64 },
    /// `σ_j = rho^{j-1}`.
    ExpDecay { rho: f64 },
    /// `count` copies of `sigma`, the rest zero.
    Flat { sigma: f64, count: usize },
    /// Explicit values, padded with zeros.
    Given { sigma: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    pub spectrum: SpectrumKind,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(m: usize, n: usize, spectrum: SpectrumKind, seed: u64) -> Self {
        Self { m, n, spectrum, seed }
    }

    /// The full list of `min(m, n)` singular values.
    pub fn sigma(&self) -> Result<Vec<f64>> {
        let r = self.m.min(self.n);
        let s: Vec<f64> = match &self.spectrum {
            SpectrumKind::ExactRank { k } => (0..r).map(|j| if j < *k { 1.0 } else { 0.0 }).collect(),
            SpectrumKind::PowerDecay { alpha } => (1..=r).map(|j| (j as f64).powf(-alpha)).collect(),
            SpectrumKind::ExpDecay { rho } => (0..r).map(|j| rho.powi(j as i32)).collect(),
            SpectrumKind::Flat { sigma, count } => (0..r).map(|j| if j < *count { *sigma } else { 0.0 }).collect(),
            SpectrumKind::Given { sigma } => {
                if sigma.len() > r {
                    return Err(Error::InvalidArgument(format!("{} values for rank at most {r}", sigma.len())));
                }
                let mut s = sigma.clone();
                s.resize(r, 0.0);
                s
            }
        };
        SpectrumView::new(s.clone(), self.m, self.n)?;
        Ok(s)
    }
}

/// `A = U diag(σ) V^*` with Haar-random orthonormal `U`, `V`.
pub fn synthetic_matrix<T: Scalar>(spec: &SyntheticSpec) -> Result<(Matrix<T>, SpectrumView)> {
    let sigma = spec.sigma()?;
    let r = sigma.len();
    let base = mix(spec.seed, stream::SYNTHETIC);
    let u: Matrix<T> = haar_orthonormal(spec.m, r, mix(base, 0));
    let v: Matrix<T> = haar_orthonormal(spec.n, r, mix(base, 1));
    let us = Matrix::from_fn(spec.m, r, |i, j| u[(i, j)].scale(T::Real::lit(sigma[j])));
    Ok((us.matmul_adjoint(&v), SpectrumView::new(sigma, spec.m, spec.n)?))
}

/// Single-layer Laplace potential between two concentric circles.
///
/// `A[i][j] = c · log|x_i - y_j| · 2π/n` with targets `x_i` on the circle
/// of radius 2 and sources `y_j` on the unit circle, `n` equispaced nodes
/// each, trapezoidal weights, and `c` chosen so that `‖A‖ = 1`.
pub fn laplace_bie_matrix<T: Scalar>(n_nodes: usize) -> Result<Matrix<T>> {
    laplace_bie_matrix_rotated(n_nodes, 0)
}

/// [`laplace_bie_matrix`] with both node sets rotated by `shift` steps.
pub fn laplace_bie_matrix_rotated<T: Scalar>(n_nodes: usize, shift: usize) -> Result<Matrix<T>> {
    if n_nodes < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 nodes, got {n_nodes}")));
    }
    let h = std::f64::consts::TAU / n_nodes as f64;
    let node = |r: f64, i: usize| {
        let t = h * ((i + shift) % n_nodes) as f64;
        (r * t.cos(), r * t.sin())
    };
    let raw = Matrix::from_fn(n_nodes, n_nodes, |i, j| {
        let (x, y) = (node(2.0, i), node(1.0, j));
        let d = ((x.0 - y.0).powi(2) + (x.1 - y.1).powi(2)).sqrt();
        d.ln() * h
    });
    let scale = singular_values(&raw)?[0];
    Ok(Matrix::from_fn(n_nodes, n_nodes, |i, j| T::from_real(T::Real::lit(raw[(i, j)] / scale))))
}

/// Per-trial values and their means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloNorms {
    pub mean_fro_sq: f64,
    pub mean_spec: f64,
    pub fro_sq: Vec<f64>,
    pub spec: Vec<f64>,
}

impl MonteCarloNorms {
    fn from_samples(samples: Vec<(f64, f64)>) -> Self {
        let (fro_sq, spec): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        Self { mean_fro_sq: mean(&fro_sq), mean_spec: mean(&spec), fro_sq, spec }
    }

    pub fn stderr_fro_sq(&self) -> f64 {
        stderr(&self.fro_sq)
    }

    pub fn stderr_spec(&self) -> f64 {
        stderr(&self.spec)
    }
}

/// Compensated (Neumaier) mean.
pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &v in x {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    (s + c) / x.len() as f64
}

/// Standard error of the mean.
pub fn stderr(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    if n < 2.0 {
        return f64::INFINITY;
    }
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    (mean(&d) * n / (n - 1.0) / n).sqrt()
}

/// `‖G^†‖_F²` and `‖G^†‖` over `trials` standard Gaussian `k x (k+p)`
/// matrices.
pub fn monte_carlo_pinv_norms(k: usize, p: usize, trials: usize, seed: u64) -> Result<MonteCarloNorms> {
    if p < 2 {
        return Err(Error::Domain(format!("E‖G^†‖_F² is infinite for p = {p} < 2")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g: Matrix<f64> = gaussian_matrix(k, k + p, mix(seed, t as u64));
            let s = singular_values(&g)?;
            let fro_sq = s.iter().map(|x| x.powi(-2)).sum::<f64>();
            Ok((fro_sq, s[k - 1].recip()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloNorms::from_samples(samples))
}

/// `‖S G T‖_F²` and `‖S G T‖` over `trials` standard Gaussian `G`.
pub fn monte_carlo_scaled_gauss(s: &Matrix<f64>, t: &Matrix<f64>, trials: usize, seed: u64) -> Result<MonteCarloNorms> {
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| {
            let g: Matrix<f64> = gaussian_matrix_stream(s.ncols(), t.nrows(), mix(seed, i as u64), stream::SYNTHETIC);
            let x = s.matmul(&g).matmul(t);
            let f = x.fro_norm();
            let sv = singular_values(&x)?;
            Ok((f * f, sv.first().copied().unwrap_or(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloNorms::from_samples(samples))
}

/// Principal angles between `range(Q1)` and `range(Q2)`, ascending.
///
/// Cosines are the singular values of `Q1^* Q2`. Small angles are taken
/// from the sines, the singular values of `(I - Q1 Q1^*) Q2`, so that
/// they are accurate below `1e-8`.
pub fn principal_angles<T: Scalar>(q1: &Matrix<T>, q2: &Matrix<T>) -> Result<Vec<T::Real>> {
    if q1.nrows() != q2.nrows() {
        return Err(Error::DimensionMismatch(format!("bases have {} and {} rows", q1.nrows(), q2.nrows())));
    }
    let (a, b) = if q1.ncols() >= q2.ncols() { (q1, q2) } else { (q2, q1) };
    let k = b.ncols();
    if k == 0 {
        return Ok(vec![]);
    }
    let cos = small_svd(&a.adjoint_matmul(b))?.sigma;
    let resid = b - &a.matmul(&a.adjoint_matmul(b));
    let mut sin = singular_values(&resid)?;
    sin.reverse();
    let one = T::Real::one();
    let half_pi = T::Real::lit(std::f64::consts::FRAC_PI_2);
    Ok((0..k)
        .map(|i| {
            let c = cos[i].min(one);
            let s = sin.get(i).copied().unwrap_or_else(T::Real::zero).min(one);
            let theta = if c * c < T::Real::lit(0.5) { c.acos() } else { s.asin() };
            theta.max(T::Real::zero()).min(half_pi)
        })
        .collect())
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// sorted descending.
pub fn jacobi_eigenvalues(a: &Matrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch("Jacobi needs a square matrix".into()));
    }
    let mut m = a.hermitian_part();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].powi(2)).sum();
        if off.sqrt() <= 1e-15 * m.fro_norm() {
            let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
            d.sort_by(|x, y| y.total_cmp(x));
            return Ok(d);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                for r in 0..n {
                    let (x, y) = (m[(r, p)], m[(r, q)]);
                    m[(r, p)] = c * x - s * y;
                    m[(r, q)] = s * x + c * y;
                }
                for r in 0..n {
                    let (x, y) = (m[(p, r)], m[(q, r)]);
                    m[(p, r)] = c * x - s * y;
                    m[(q, r)] = s * x + c * y;
                }
            }
        }
    }
    Err(Error::KernelFailure("Jacobi sweeps did not converge".into()))
}

/// Singular values of a real matrix from the Jacobi eigenvalues of `A^T A`.
pub fn jacobi_singular_values(a: &Matrix<f64>) -> Result<Vec<f64>> {
    let g = a.adjoint_matmul(a);
    let mut s: Vec<f64> = jacobi_eigenvalues(&g)?.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    s.truncate(a.nrows().min(a.ncols()));
    Ok(s)
}

/// Real and imaginary parts split into a real matrix twice as wide; its
/// singular values are those of the input, each repeated twice.
pub fn realify(a: &Matrix<Complex<f64>>) -> Matrix<f64> {
    let (m, n) = a.shape();
    Matrix::from_fn(2 * m, 2 * n, |i, j| {
        let z = a[(i % m, j % n)];
        match (i < m, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn projection_error_examples() {
        let a = Matrix::<f64>::from_diag(&[2.0, 1.0]);
        assert_eq!(exact_projection_error(&a, &Matrix::eye(2, 1), Norm::Spectral).unwrap(), 1.0);
        assert_eq!(exact_projection_error(&a, &Matrix::identity(2), Norm::Spectral).unwrap(), 0.0);
        let g = gaussian_matrix::<f64>(12, 9, 1);
        let q = haar_orthonormal::<f64>(12, 4, 2);
        let e = exact_projection_error(&g, &q, Norm::Frobenius).unwrap();
        let pyth = g.fro_norm().powi(2) - q.adjoint_matmul(&g).fro_norm().powi(2);
        assert!((e * e - pyth).abs() < 1e-11);
    }

    #[test]
    fn optimal_error_examples() {
        let a = Matrix::<f64>::from_diag(&[5.0, 4.0, 3.0]);
        assert!((optimal_error(&a, 1, Norm::Spectral).unwrap() - 4.0).abs() < 1e-14);
        assert!((optimal_error(&a, 1, Norm::Frobenius).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(optimal_error(&a, 3, Norm::Spectral).unwrap(), 0.0);
        let u = haar_orthonormal::<f64>(3, 3, 4);
        let b = u.matmul(&a).matmul_adjoint(&u);
        assert!((optimal_error(&b, 1, Norm::Spectral).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn synthetic_spectra() {
        let (a, s) = synthetic_matrix::<f64>(&SyntheticSpec::new(10, 8, SpectrumKind::ExactRank { k: 3 }, 1)).unwrap();
        assert!(s.sigma[3..].iter().all(|&x| x == 0.0));
        assert!(singular_values(&a).unwrap()[3] < 1e-14);
        let (a, s) = synthetic_matrix::<f64>(&SyntheticSpec::new(30, 20, SpectrumKind::PowerDecay { alpha: 2.0 }, 2)).unwrap();
        assert_eq!(s.sigma[2], 1.0 / 9.0);
        for (x, y) in singular_values(&a).unwrap().iter().zip(&s.sigma) {
            assert!((x - y).abs() < 1e-11);
        }
        let (c, s) = synthetic_matrix::<c64>(&SyntheticSpec::new(12, 15, SpectrumKind::ExpDecay { rho: 0.5 }, 3)).unwrap();
        for (x, y) in singular_values(&c).unwrap().iter().zip(&s.sigma) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_matrix_properties() {
        let a = laplace_bie_matrix::<f64>(200).unwrap();
        assert_eq!(a.shape(), (200, 200));
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-10);
        let first_tiny = s.iter().position(|&x| x < 1e-14).unwrap();
        assert!(first_tiny < 120, "{first_tiny}");
        let b = laplace_bie_matrix_rotated::<f64>(200, 17).unwrap();
        for (x, y) in s.iter().zip(&singular_values(&b).unwrap()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(laplace_bie_matrix::<f64>(3).is_err());
    }

    #[test]
    fn pinv_norms_domain() {
        assert!(matches!(monte_carlo_pinv_norms(3, 1, 10, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn scaled_gauss_scalar_case() {
        let one = Matrix::<f64>::identity(1);
        let r = monte_carlo_scaled_gauss(&one, &one, 4000, 3).unwrap();
        assert!((r.mean_fro_sq - 1.0).abs() < 3.0 * r.stderr_fro_sq());
    }

    #[test]
    fn principal_angle_examples() {
        let q = haar_orthonormal::<f64>(8, 3, 1);
        assert!(principal_angles(&q, &q).unwrap().iter().all(|&t| t < 1e-14));
        let e1 = Matrix::<f64>::eye(2, 1);
        let e2 = Matrix::from_col(&[0.0, 1.0]);
        assert!((principal_angles(&e1, &e2).unwrap()[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        for theta in [1e-9, 0.3, 1.2] {
            let r = Matrix::from_col(&[theta.cos(), theta.sin()]);
            assert!((principal_angles(&e1, &r).unwrap()[0] - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        let s = jacobi_singular_values(&a).unwrap();
        assert!((s[0] - 1.6180339887).abs() < 1e-9 && (s[1] - 0.6180339887).abs() < 1e-9);
    }

    #[test]
    fn realify_doubles_singular_values() {
        let a = gaussian_matrix::<c64>(5, 4, 2);
        let r = jacobi_singular_values(&realify(&a)).unwrap();
        let s = singular_values(&a).unwrap();
        for (i, x) in s.iter().enumerate() {
            assert!((r[2 * i] - x).abs() < 1e-10 && (r[2 * i + 1] - x).abs() < 1e-10);
        }
    }
}
