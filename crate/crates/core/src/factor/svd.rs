use crate::error::{Error, Result};
use crate::factor::{row_id, PartialSvd};
use crate::linalg::{householder_qr, small_svd, LinearOperator};
use crate::prelude::*;

/// Direct SVD from a range basis: `B = Q^* A`, `B = Ũ Σ V^*`, `U = Q Ũ`.
///
/// The error `‖A - UΣV^*‖` equals `‖A - QQ^*A‖`. Costs one pass of
/// adjoint applications.
pub fn direct_svd<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, q: &Matrix<T>) -> Result<PartialSvd<T>> {
    if q.nrows() != op.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, operator has {}",
            q.nrows(),
            op.nrows()
        )));
    }
    let n = op.ncols();
    if q.ncols() == 0 {
        return Ok(PartialSvd { u: Matrix::zeros(q.nrows(), 0), sigma: vec![], v: Matrix::zeros(n, 0) });
    }
    let b = op.apply_adjoint(q).adjoint();
    let s = small_svd(&b)?;
    Ok(PartialSvd { u: q.matmul(&s.u), sigma: s.sigma, v: s.v })
}

/// SVD via row extraction from a dense `A` and either a basis `Q` or the
/// raw sample matrix `Y`.
///
/// Row ID `Q = X Q(J, :)`, QR `A(J, :)^* = W R`, `Z = X R^*`,
/// `Z = U Σ Ṽ^*`, `V = W Ṽ`.
pub fn svd_via_row_extraction<T: Scalar>(a: &Matrix<T>, q_or_y: &Matrix<T>) -> Result<PartialSvd<T>> {
    let (m, n) = a.shape();
    if q_or_y.nrows() != m {
        return Err(Error::DimensionMismatch(format!("basis has {} rows, A has {m}", q_or_y.nrows())));
    }
    let k = q_or_y.ncols().min(n);
    if k == 0 {
        return Ok(PartialSvd { u: Matrix::zeros(m, 0), sigma: vec![], v: Matrix::zeros(n, 0) });
    }
    let id = row_id(&q_or_y.leading_cols(k), k)?;
    let aj = a.select_rows(&id.j);
    let f = householder_qr(&aj.adjoint());
    let z = id.x.matmul(&f.r.adjoint());
    let s = small_svd(&z)?;
    Ok(PartialSvd { u: s.u, sigma: s.sigma, v: f.q.matmul(&s.v) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::linalg::{dense_operator, spectral_norm};
    use crate::matrix::orthonormality_defect;
    use crate::sketch::{gaussian_matrix, haar_orthonormal};

    fn err<T: Scalar>(a: &Matrix<T>, f: &PartialSvd<T>) -> T::Real {
        spectral_norm(&(a - &f.reconstruct())).unwrap()
    }

    #[test]
    fn consistent_input() {
        let q = haar_orthonormal::<f64>(10, 2, 1);
        let v = haar_orthonormal::<f64>(8, 2, 2);
        let a = q.matmul(&Matrix::from_diag(&[3.0, 1.0])).matmul_adjoint(&v);
        let op = dense_operator(&a);
        let f = direct_svd(&op, &q).unwrap();
        assert!((f.sigma[0] - 3.0).abs() < 1e-13 && (f.sigma[1] - 1.0).abs() < 1e-13);
        assert!(err(&a, &f) <= 1e-12);
        assert_eq!(op.counters().adjoint_matvecs, 2);
        assert_eq!(op.counters().passes, 1);
    }

    #[test]
    fn diagonal_with_partial_basis() {
        let a = Matrix::from_diag(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let q = Matrix::<f64>::eye(5, 3);
        let f = direct_svd(&a, &q).unwrap();
        assert_eq!(f.sigma, vec![5.0, 4.0, 3.0]);
        assert!((err(&a, &f) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let a = Matrix::<f64>::zeros(6, 4);
        let f = direct_svd(&a, &Matrix::eye(6, 2)).unwrap();
        assert!(f.sigma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn direct_error_equals_projection_error() {
        let a = gaussian_matrix::<c64>(20, 15, 3);
        let q = haar_orthonormal::<c64>(20, 6, 4);
        let f = direct_svd(&a, &q).unwrap();
        let proj = spectral_norm(&(&a - &q.matmul(&q.adjoint_matmul(&a)))).unwrap();
        assert!((err(&a, &f) - proj).abs() <= 1e-11 * proj);
        assert!(orthonormality_defect(&f.u) < 1e-11 && orthonormality_defect(&f.v) < 1e-11);
    }

    #[test]
    fn row_extraction_exact_rank() {
        let u = haar_orthonormal::<f64>(30, 4, 1);
        let v = haar_orthonormal::<f64>(25, 4, 2);
        let a = u.matmul(&Matrix::from_diag(&[4.0, 3.0, 2.0, 1.0])).matmul_adjoint(&v);
        let f = svd_via_row_extraction(&a, &u).unwrap();
        assert!(err(&a, &f) <= 1e-10 * 4.0);
        assert!(orthonormality_defect(&f.u) < 1e-11 && orthonormality_defect(&f.v) < 1e-11);
        let y = a.matmul(&gaussian_matrix::<f64>(25, 4, 5));
        let g = svd_via_row_extraction(&a, &y).unwrap();
        assert!(err(&a, &g) <= 1e-10 * 4.0);
    }
}
