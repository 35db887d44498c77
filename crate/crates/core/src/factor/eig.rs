use crate::error::{Error, Result};
use crate::factor::{row_id, PartialEig};
use crate::linalg::{cholesky, householder_qr, small_eig_hermitian, small_svd, solve_lower, LinearOperator};
use crate::matrix::{dot, norm2};
use crate::prelude::*;
use crate::sketch::gaussian_matrix;

/// Relative mismatch above which an operator is rejected as non-Hermitian.
pub const HERMITIAN_PROBE_TOL: f64 = 1e-8;

/// `|<Ax, y> - <x, Ay>| / (‖Ax‖‖y‖ + ‖x‖‖Ay‖)` for one random pair,
/// using a single block application of `A`.
pub fn hermitian_probe<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, seed: u64) -> Result<T::Real> {
    let n = op.ncols();
    if op.nrows() != n {
        return Err(Error::DimensionMismatch(format!("Hermitian operator must be square, got {}x{n}", op.nrows())));
    }
    let xy: Matrix<T> = gaussian_matrix(n, 2, seed);
    let a = op.apply(&xy);
    let (x, y, ax, ay) = (xy.col(0), xy.col(1), a.col(0), a.col(1));
    let denom = norm2(&ax) * norm2(&y) + norm2(&x) * norm2(&ay);
    if denom == T::Real::zero() {
        return Ok(T::Real::zero());
    }
    Ok((dot(&ax, &y) - dot(&x, &ay)).modulus() / denom)
}

fn require_hermitian<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O) -> Result<()> {
    let d = hermitian_probe(op, 0x4845_524d)?;
    if d > T::Real::lit(HERMITIAN_PROBE_TOL) {
        return Err(Error::NotHermitian(d.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

fn check_basis<T: Scalar>(q: &Matrix<T>, m: usize) -> Result<()> {
    if q.nrows() != m {
        return Err(Error::DimensionMismatch(format!("basis has {} rows, operator has {m}", q.nrows())));
    }
    Ok(())
}

/// Direct eigendecomposition of a Hermitian operator from a basis:
/// `B = Q^* A Q = V Λ V^*`, `U = Q V`.
pub fn direct_eig_hermitian<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, q: &Matrix<T>) -> Result<PartialEig<T>> {
    require_hermitian(op)?;
    check_basis(q, op.nrows())?;
    if q.ncols() == 0 {
        return Ok(PartialEig { u: Matrix::zeros(q.nrows(), 0), lambda: vec![] });
    }
    let b = q.adjoint_matmul(&op.apply(q));
    let e = small_eig_hermitian(&b)?;
    Ok(PartialEig { u: q.matmul(&e.v), lambda: e.lambda })
}

/// Eigendecomposition of a dense Hermitian `A` via row extraction:
/// row ID `Q = X Q(J, :)`, `X = V R`, `Z = R A(J, J) R^*`, `Z = W Λ W^*`,
/// `U = V W`.
pub fn eig_via_row_extraction<T: Scalar>(a: &Matrix<T>, q: &Matrix<T>) -> Result<PartialEig<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("Hermitian input must be square, got {n}x{}", a.ncols())));
    }
    let defect = a.hermitian_defect();
    if defect > T::Real::lit(HERMITIAN_PROBE_TOL) * a.fro_norm() {
        return Err(Error::NotHermitian((defect / a.fro_norm()).to_f64().unwrap_or(f64::NAN)));
    }
    check_basis(q, n)?;
    let k = q.ncols();
    if k == 0 {
        return Ok(PartialEig { u: Matrix::zeros(n, 0), lambda: vec![] });
    }
    let id = row_id(q, k)?;
    let f = householder_qr(&id.x);
    let ajj = a.select_rows(&id.j).select_cols(&id.j);
    let z = f.r.matmul(&ajj).matmul_adjoint(&f.r).hermitian_part();
    let e = small_eig_hermitian(&z)?;
    Ok(PartialEig { u: f.q.matmul(&e.v), lambda: e.lambda })
}

/// Approximate Cholesky factor: `A ≈ F F^*`.
#[derive(Clone, Debug)]
pub struct NystromFactors<T: Scalar> {
    pub f: Matrix<T>,
}

#[derive(Debug)]
pub struct NystromResult<T: Scalar> {
    pub eig: PartialEig<T>,
    pub factors: NystromFactors<T>,
    /// Set when `Q^* A Q` failed the PSD test and the eigenvalue fallback
    /// was used; holds the Cholesky error.
    pub fallback: Option<Error>,
}

/// Nyström eigendecomposition of a PSD operator.
///
/// `B1 = A Q`, `B2 = Q^* B1 = C^* C`, `F = B1 C^{-1}`, `F = U Σ V^*`,
/// `Λ = Σ^2`. If the Cholesky factorization rejects `B2`, the factor is
/// built from the eigendecomposition of `B2` with negative eigenvalues
/// clamped to zero, and the failure is reported in `fallback`.
pub fn eig_nystrom<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, q: &Matrix<T>) -> Result<NystromResult<T>> {
    nystrom_impl(op, q, true)
}

/// [`eig_nystrom`] that returns the Cholesky error instead of falling back.
pub fn eig_nystrom_strict<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    q: &Matrix<T>,
) -> Result<NystromResult<T>> {
    nystrom_impl(op, q, false)
}

fn nystrom_impl<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    q: &Matrix<T>,
    allow_fallback: bool,
) -> Result<NystromResult<T>> {
    require_hermitian(op)?;
    check_basis(q, op.nrows())?;
    let m = q.nrows();
    if q.ncols() == 0 {
        let z = Matrix::zeros(m, 0);
        return Ok(NystromResult {
            eig: PartialEig { u: z.clone(), lambda: vec![] },
            factors: NystromFactors { f: z },
            fallback: None,
        });
    }
    let b1 = op.apply(q);
    let b2 = q.adjoint_matmul(&b1).hermitian_part();
    let (f, fallback) = match cholesky(&b2) {
        Ok(c) => (solve_lower(&c.c.adjoint(), &b1.adjoint()).adjoint(), None),
        Err(e @ Error::NotPsd { .. }) if allow_fallback => {
            let eb = small_eig_hermitian(&b2)?;
            let top = eb.lambda.iter().fold(T::Real::zero(), |a, &l| a.max(l.abs()));
            let keep: Vec<usize> =
                (0..eb.lambda.len()).filter(|&i| eb.lambda[i] > T::Real::lit(1e-12) * top).collect();
            let v = eb.v.select_cols(&keep);
            let scale: Vec<T::Real> = keep.iter().map(|&i| eb.lambda[i].sqrt().recip()).collect();
            let bv = b1.matmul(&v);
            let f = Matrix::from_fn(m, keep.len(), |i, j| bv[(i, j)].scale(scale[j]));
            (f, Some(e))
        }
        Err(e) => return Err(e),
    };
    let s = small_svd(&f)?;
    let lambda: Vec<T::Real> = s.sigma.iter().map(|&x| x * x).collect();
    Ok(NystromResult { eig: PartialEig { u: s.u, lambda }, factors: NystromFactors { f }, fallback })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::linalg::spectral_norm;
    use crate::matrix::orthonormality_defect;
    use crate::sketch::haar_orthonormal;

    #[test]
    fn diagonal_full_basis() {
        let a = Matrix::from_diag(&[3.0, -2.0, 1.0]);
        let e = direct_eig_hermitian(&a, &Matrix::identity(3)).unwrap();
        assert_eq!(e.lambda, vec![3.0, -2.0, 1.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(direct_eig_hermitian(&a, &Matrix::identity(2)), Err(Error::NotHermitian(_))));
        assert!(matches!(eig_via_row_extraction(&a, &Matrix::identity(2)), Err(Error::NotHermitian(_))));
    }

    fn psd_rank(n: usize, d: &[f64], seed: u64) -> (Matrix<f64>, Matrix<f64>) {
        let u = haar_orthonormal::<f64>(n, d.len(), seed);
        (u.matmul(&Matrix::from_diag(d)).matmul_adjoint(&u), u)
    }

    #[test]
    fn exact_rank_psd() {
        let d = [5.0, 2.0, 1.0, 0.5];
        let (a, u) = psd_rank(30, &d, 3);
        let e = direct_eig_hermitian(&a, &u).unwrap();
        for (x, y) in e.lambda.iter().zip(d) {
            assert!((x - y).abs() < 1e-10);
        }
        let r = eig_via_row_extraction(&a, &u).unwrap();
        for (x, y) in r.lambda.iter().zip(d) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(orthonormality_defect(&r.u) < 1e-11);
        let ny = eig_nystrom(&a, &u).unwrap();
        assert!(ny.fallback.is_none());
        assert!((&ny.eig.reconstruct() - &a).fro_norm() <= 1e-9);
        let ff = ny.factors.f.matmul_adjoint(&ny.factors.f);
        assert!((&ff - &a).fro_norm() <= 1e-9);
    }

    #[test]
    fn nystrom_eigenvalues_nonnegative_and_complex() {
        let g = crate::sketch::gaussian_matrix::<c64>(20, 5, 1);
        let a = g.matmul_adjoint(&g);
        let q = haar_orthonormal::<c64>(20, 4, 2);
        let ny = eig_nystrom(&a, &q).unwrap();
        assert!(ny.eig.lambda.iter().all(|&l| l >= 0.0));
        let proj = spectral_norm(&(&a - &q.matmul(&q.adjoint_matmul(&a)))).unwrap();
        let err = spectral_norm(&(&a - &ny.eig.reconstruct())).unwrap();
        assert!(err <= proj * (1.0 + 1e-12));
    }

    #[test]
    fn nystrom_on_indefinite_input() {
        let a = Matrix::from_diag(&[1.0, -1.0, 0.5]);
        let q = Matrix::<f64>::identity(3);
        assert!(matches!(eig_nystrom_strict(&a, &q), Err(Error::NotPsd { .. })));
        let r = eig_nystrom(&a, &q).unwrap();
        assert!(r.fallback.is_some());
        assert!(r.eig.lambda.iter().all(|&l| l >= 0.0));
        assert!((r.eig.lambda[0] - 1.0).abs() < 1e-14 && (r.eig.lambda[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn row_extraction_z_is_hermitian() {
        let g = crate::sketch::gaussian_matrix::<f64>(12, 12, 5);
        let a = g.hermitian_part();
        let q = haar_orthonormal::<f64>(12, 4, 1);
        let id = row_id(&q, 4).unwrap();
        let f = householder_qr(&id.x);
        let z = f.r.matmul(&a.select_rows(&id.j).select_cols(&id.j)).matmul_adjoint(&f.r);
        assert!(z.hermitian_defect() <= 1e-12 * z.fro_norm());
    }
}
