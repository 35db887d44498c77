use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{PartialEig, PartialSvd};
use crate::linalg::{default_rank_tol, least_squares, orthonormalize_double_gs, singular_values, small_eig_hermitian, small_svd, LinearOperator};
use crate::prelude::*;
use crate::rng::stream;
use crate::sketch::{gaussian_matrix, gaussian_matrix_stream};

/// Condition number of `Q^* Ω` above which a one-pass run is flagged.
pub const ONE_PASS_COND_WARN: f64 = 1e12;
/// Largest `k * k̃` accepted by [`svd_one_pass_general`].
pub const ONE_PASS_UNKNOWN_CAP: usize = 250_000;

/// How the basis `Q` is derived from the sample matrix `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChoice {
    /// `Q = orth(Y)`.
    Orthonormalize,
    /// The `k` leading left singular vectors of `Y`.
    LeadingSingular(usize),
}

fn basis_of<T: Scalar>(y: &Matrix<T>, choice: BasisChoice) -> Result<Matrix<T>> {
    match choice {
        BasisChoice::Orthonormalize => Ok(orthonormalize_double_gs(y, default_rank_tol())),
        BasisChoice::LeadingSingular(k) => {
            if k > y.ncols() {
                return Err(Error::InvalidArgument(format!("{k} singular vectors from {} samples", y.ncols())));
            }
            Ok(small_svd(y)?.u.leading_cols(k))
        }
    }
}

/// Everything a single-pass algorithm may use: the test matrices, the
/// samples and the bases derived from them. `A` itself is not kept.
#[derive(Clone, Debug)]
pub struct SampleBundle<T: Scalar> {
    /// `n x ℓ`.
    pub omega: Matrix<T>,
    /// `Y = A Ω`, `m x ℓ`.
    pub y: Matrix<T>,
    pub q: Matrix<T>,
    /// `m x ℓ̃`.
    pub omega_tilde: Option<Matrix<T>>,
    /// `Ỹ = A^* Ω̃`, `n x ℓ̃`.
    pub y_tilde: Option<Matrix<T>>,
    pub q_tilde: Option<Matrix<T>>,
    pub choice: BasisChoice,
}

impl<T: Scalar> SampleBundle<T> {
    pub fn from_samples(omega: Matrix<T>, y: Matrix<T>, choice: BasisChoice) -> Result<Self> {
        if omega.ncols() != y.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} test vectors but {} samples",
                omega.ncols(),
                y.ncols()
            )));
        }
        let q = basis_of(&y, choice)?;
        Ok(Self { omega, y, q, omega_tilde: None, y_tilde: None, q_tilde: None, choice })
    }

    /// Adds the adjoint-side sketch `Ỹ = A^* Ω̃`.
    pub fn with_adjoint_samples(mut self, omega_tilde: Matrix<T>, y_tilde: Matrix<T>) -> Result<Self> {
        if omega_tilde.ncols() != y_tilde.ncols() || omega_tilde.nrows() != self.y.nrows() {
            return Err(Error::DimensionMismatch("adjoint sketch does not match the bundle".into()));
        }
        self.q_tilde = Some(basis_of(&y_tilde, self.choice)?);
        self.omega_tilde = Some(omega_tilde);
        self.y_tilde = Some(y_tilde);
        Ok(self)
    }

    /// `Y = A Ω` with Gaussian `Ω` drawn from `seed`.
    pub fn one_sided<O: LinearOperator<T> + ?Sized>(op: &O, ell: usize, seed: u64, choice: BasisChoice) -> Result<Self> {
        let omega: Matrix<T> = gaussian_matrix(op.ncols(), ell, seed);
        let y = op.apply(&omega);
        Self::from_samples(omega, y, choice)
    }

    /// Both `Y = A Ω` and `Ỹ = A^* Ω̃`.
    pub fn two_sided<O: LinearOperator<T> + ?Sized>(
        op: &O,
        ell: usize,
        ell_tilde: usize,
        seed: u64,
        choice: BasisChoice,
    ) -> Result<Self> {
        let b = Self::one_sided(op, ell, seed, choice)?;
        let (omega_t, y_t) = adjoint_sketch(op, ell_tilde, seed);
        b.with_adjoint_samples(omega_t, y_t)
    }
}

/// `(Ω̃, A^* Ω̃)` for the left test matrix drawn from `seed`.
pub(crate) fn adjoint_sketch<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    ell_tilde: usize,
    seed: u64,
) -> (Matrix<T>, Matrix<T>) {
    let omega_t: Matrix<T> = gaussian_matrix_stream(op.nrows(), ell_tilde, seed, stream::TEST_MATRIX_LEFT);
    let y_t = op.apply_adjoint(&omega_t);
    (omega_t, y_t)
}

/// Conditioning of the small system solved by a one-pass method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnePassDiagnostics {
    /// Smallest singular value of `Q^* Ω`.
    pub tau_min: f64,
    /// `σ_max(Q^* Ω) / τ_min`.
    pub cond: f64,
    pub ill_conditioned: bool,
    pub choice: BasisChoice,
}

fn diagnostics<T: Scalar>(m: &Matrix<T>, choice: BasisChoice) -> Result<OnePassDiagnostics> {
    let s = if m.nrows() == 0 || m.ncols() == 0 { vec![] } else { singular_values(m)? };
    let top = s.first().map_or(0.0, |x| x.to_f64().unwrap_or(f64::NAN));
    let tau = s.last().map_or(0.0, |x| x.to_f64().unwrap_or(f64::NAN));
    let cond = if tau > 0.0 { top / tau } else { f64::INFINITY };
    Ok(OnePassDiagnostics { tau_min: tau, cond, ill_conditioned: cond > ONE_PASS_COND_WARN, choice })
}

/// Single-pass Hermitian eigendecomposition from `(Ω, Y, Q)`.
///
/// Solves `B (Q^* Ω) ≈ Q^* Y` in least squares, replaces `B` by its
/// Hermitian part, and returns `U = Q V` from `B = V Λ V^*`.
pub fn eig_one_pass<T: Scalar>(bundle: &SampleBundle<T>) -> Result<(PartialEig<T>, OnePassDiagnostics)> {
    let q = &bundle.q;
    if bundle.omega.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch("one-pass eigendecomposition needs a square input".into()));
    }
    let m = q.adjoint_matmul(&bundle.omega);
    let diag = diagnostics(&m, bundle.choice)?;
    if q.ncols() == 0 {
        return Ok((PartialEig { u: q.clone(), lambda: vec![] }, diag));
    }
    let n = q.adjoint_matmul(&bundle.y);
    let b = least_squares(&m.adjoint(), &n.adjoint())?.adjoint().hermitian_part();
    let e = small_eig_hermitian(&b)?;
    Ok((PartialEig { u: q.matmul(&e.v), lambda: e.lambda }, diag))
}

/// Single-pass SVD of a general matrix from both sketches.
///
/// `B` minimizes `‖B (Q̃^* Ω) - Q^* Y‖_F^2 + ‖B^* (Q^* Ω̃) - Q̃^* Ỹ‖_F^2`
/// with equal weights. Its normal equations are the Sylvester equation
/// `P B + B S = C` with `P = (Q^*Ω̃)(Q^*Ω̃)^*` and `S = (Q̃^*Ω)(Q̃^*Ω)^*`,
/// solved in the joint eigenbasis of `P` and `S`.
pub fn svd_one_pass_general<T: Scalar>(bundle: &SampleBundle<T>) -> Result<(PartialSvd<T>, OnePassDiagnostics)> {
    let (Some(omega_t), Some(y_t), Some(q_t)) = (&bundle.omega_tilde, &bundle.y_tilde, &bundle.q_tilde) else {
        return Err(Error::InvalidArgument("general one-pass SVD needs both sketches".into()));
    };
    let q = &bundle.q;
    let (k, kt) = (q.ncols(), q_t.ncols());
    if k * kt > ONE_PASS_UNKNOWN_CAP {
        return Err(Error::DimensionCap(format!(
            "{k} x {kt} = {} unknowns exceed the one-pass limit of {ONE_PASS_UNKNOWN_CAP}",
            k * kt
        )));
    }
    let m1 = q_t.adjoint_matmul(&bundle.omega);
    let diag = diagnostics(&m1, bundle.choice)?;
    if k == 0 || kt == 0 {
        let svd = PartialSvd { u: Matrix::zeros(q.nrows(), 0), sigma: vec![], v: Matrix::zeros(q_t.nrows(), 0) };
        return Ok((svd, diag));
    }
    let n1 = q.adjoint_matmul(&bundle.y);
    let m2 = q.adjoint_matmul(omega_t);
    let n2 = q_t.adjoint_matmul(y_t);
    let p = m2.matmul_adjoint(&m2);
    let s = m1.matmul_adjoint(&m1);
    let c = &n1.matmul_adjoint(&m1) + &m2.matmul_adjoint(&n2);
    let b = solve_sylvester_psd(&p, &s, &c)?;
    let f = small_svd(&b)?;
    Ok((PartialSvd { u: q.matmul(&f.u), sigma: f.sigma, v: q_t.matmul(&f.v) }, diag))
}

/// `P B + B S = C` for Hermitian PSD `P`, `S`. Modes where both
/// eigenvalues vanish get a zero coefficient.
fn solve_sylvester_psd<T: Scalar>(p: &Matrix<T>, s: &Matrix<T>, c: &Matrix<T>) -> Result<Matrix<T>> {
    let ep = small_eig_hermitian(p)?;
    let es = small_eig_hermitian(s)?;
    let top = ep.lambda.iter().chain(&es.lambda).fold(T::Real::zero(), |a, &l| a.max(l.abs()));
    let floor = T::Real::epsilon() * top;
    let ct = ep.v.adjoint_matmul(c).matmul(&es.v);
    let bt = Matrix::from_fn(ct.nrows(), ct.ncols(), |i, j| {
        let d = ep.lambda[i] + es.lambda[j];
        if d > floor {
            ct[(i, j)].scale(d.recip())
        } else {
            T::zero()
        }
    });
    Ok(ep.v.matmul(&bt).matmul_adjoint(&es.v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;
    use crate::sketch::haar_orthonormal;

    fn herm_rank(n: usize, d: &[f64], seed: u64) -> Matrix<f64> {
        let u = haar_orthonormal::<f64>(n, d.len(), seed);
        u.matmul(&Matrix::from_diag(d)).matmul_adjoint(&u)
    }

    #[test]
    fn exact_rank_hermitian() {
        let d: Vec<f64> = (0..10).map(|j| if j % 3 == 1 { -1.0 } else { 1.0 } * (10 - j) as f64).collect();
        let a = herm_rank(120, &d, 1);
        let b = SampleBundle::one_sided(&a, 20, 7, BasisChoice::Orthonormalize).unwrap();
        let (e, diag) = eig_one_pass(&b).unwrap();
        assert!(!diag.ill_conditioned);
        let mut want: Vec<f64> = d.clone();
        want.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).unwrap());
        for (x, y) in e.lambda.iter().zip(&want) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        assert!(spectral_norm(&(&a - &e.reconstruct())).unwrap() <= 1e-6 * 10.0);
    }

    #[test]
    fn zero_input() {
        let a = Matrix::<f64>::zeros(15, 15);
        let b = SampleBundle::one_sided(&a, 5, 1, BasisChoice::LeadingSingular(3)).unwrap();
        let (e, _) = eig_one_pass(&b).unwrap();
        assert!(e.lambda.iter().all(|&l| l == 0.0));
        let b = SampleBundle::two_sided(&a, 5, 5, 1, BasisChoice::Orthonormalize).unwrap();
        let (s, _) = svd_one_pass_general(&b).unwrap();
        assert!(s.sigma.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn general_exact_rank() {
        let u = haar_orthonormal::<f64>(60, 6, 1);
        let v = haar_orthonormal::<f64>(45, 6, 2);
        let a = u.matmul(&Matrix::from_diag(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0])).matmul_adjoint(&v);
        let b = SampleBundle::two_sided(&a, 16, 16, 3, BasisChoice::Orthonormalize).unwrap();
        let (s, _) = svd_one_pass_general(&b).unwrap();
        assert!(spectral_norm(&(&a - &s.reconstruct())).unwrap() <= 1e-6 * 6.0);
    }

    #[test]
    fn hermitian_cross_check() {
        let a = herm_rank(40, &[3.0, -2.0, 1.0], 4);
        let b = SampleBundle::two_sided(&a, 8, 8, 2, BasisChoice::Orthonormalize).unwrap();
        let (e, _) = eig_one_pass(&b).unwrap();
        let (s, _) = svd_one_pass_general(&b).unwrap();
        for (l, x) in e.lambda.iter().zip(&s.sigma) {
            assert!((l.abs() - x).abs() < 1e-6);
        }
    }

    // explicit Kronecker form of the stacked least-squares problem
    fn stacked_oracle(m1: &Matrix<f64>, n1: &Matrix<f64>, m2: &Matrix<f64>, n2: &Matrix<f64>, k: usize, kt: usize) -> Matrix<f64> {
        let (l, lt) = (m1.ncols(), m2.ncols());
        // unknown b_{ij} at index i + k j
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..k {
            for c in 0..l {
                let mut r = vec![0.0; k * kt];
                for j in 0..kt {
                    r[i + k * j] = m1[(j, c)];
                }
                rows.push(r);
                rhs.push(n1[(i, c)]);
            }
        }
        for j in 0..kt {
            for c in 0..lt {
                let mut r = vec![0.0; k * kt];
                for i in 0..k {
                    r[i + k * j] = m2[(i, c)];
                }
                rows.push(r);
                rhs.push(n2[(j, c)]);
            }
        }
        let a = Matrix::from_rows(&rows);
        let x = least_squares(&a, &Matrix::from_col(&rhs)).unwrap();
        Matrix::from_fn(k, kt, |i, j| x[(i + k * j, 0)])
    }

    #[test]
    fn sylvester_matches_stacked_system() {
        let g = crate::sketch::gaussian_matrix::<f64>;
        let (k, kt) = (4, 3);
        let (m1, n1, m2, n2) = (g(kt, 7, 1), g(k, 7, 2), g(k, 6, 3), g(kt, 6, 4));
        let p = m2.matmul_adjoint(&m2);
        let s = m1.matmul_adjoint(&m1);
        let c = &n1.matmul_adjoint(&m1) + &m2.matmul_adjoint(&n2);
        let b = solve_sylvester_psd(&p, &s, &c).unwrap();
        let want = stacked_oracle(&m1, &n1, &m2, &n2, k, kt);
        assert!((&b - &want).max_abs() < 1e-10);
    }

    #[test]
    fn oversampled_basis_choice() {
        let d: Vec<f64> = (0..30).map(|j| 0.7f64.powi(j)).collect();
        let a = herm_rank(80, &d, 3);
        let b = SampleBundle::one_sided(&a, 20, 5, BasisChoice::LeadingSingular(10)).unwrap();
        assert_eq!(b.q.ncols(), 10);
        let (e, diag) = eig_one_pass(&b).unwrap();
        assert_eq!(diag.choice, BasisChoice::LeadingSingular(10));
        assert!(diag.tau_min > 0.0);
        assert!((e.lambda[0] - 1.0).abs() < 0.05, "{}", e.lambda[0]);
    }

    #[test]
    fn dimension_cap() {
        let a = Matrix::<f64>::identity(3);
        let mut b = SampleBundle::two_sided(&a, 2, 2, 1, BasisChoice::Orthonormalize).unwrap();
        b.q = Matrix::zeros(600, 501);
        b.q_tilde = Some(Matrix::zeros(600, 500));
        assert!(matches!(svd_one_pass_general(&b), Err(Error::DimensionCap(_))));
    }
}
