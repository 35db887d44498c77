use crate::error::{Error, Result};
use crate::prelude::*;

/// Relative pivot tolerance for the semidefinite Cholesky.
pub const CHOLESKY_TOL: f64 = 1e-12;

/// Upper-triangular `C` with `B = C^* C`, plus the indices of pivots that
/// were clamped to zero.
#[derive(Clone, Debug)]
pub struct Cholesky<T: Scalar> {
    pub c: Matrix<T>,
    pub zero_pivots: Vec<usize>,
}

/// Semidefinite Cholesky of a Hermitian matrix.
///
/// Pivots below `-tol` fail with [`Error::NotPsd`]; pivots in `[-tol, tol]`
/// are clamped to zero and their row of `C` is left zero. Here
/// `tol = 1e-12 * ‖B‖_F`.
pub fn cholesky<T: Scalar>(b: &Matrix<T>) -> Result<Cholesky<T>> {
    let (n, n2) = b.shape();
    if n != n2 {
        return Err(Error::DimensionMismatch(format!("Cholesky of a {n}x{n2} matrix")));
    }
    let tol = T::Real::lit(CHOLESKY_TOL) * b.fro_norm();
    let mut c = Matrix::<T>::zeros(n, n);
    let mut zero_pivots = Vec::new();
    for j in 0..n {
        let mut d = b[(j, j)].re();
        for k in 0..j {
            d -= c[(k, j)].modulus_sqr();
        }
        if d < -tol {
            return Err(Error::NotPsd {
                index: j,
                pivot: d.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        if d <= tol {
            zero_pivots.push(j);
            continue;
        }
        let cjj = d.sqrt();
        c[(j, j)] = T::from_real(cjj);
        let inv = cjj.recip();
        for i in j + 1..n {
            let mut s = b[(j, i)];
            for k in 0..j {
                s -= c[(k, j)].conj() * c[(k, i)];
            }
            c[(j, i)] = s.scale(inv);
        }
    }
    Ok(Cholesky { c, zero_pivots })
}
