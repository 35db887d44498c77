use crate::error::{Error, Result};
use crate::linalg::pivoted_qr::pivoted_qr;
use crate::linalg::qr::{householder_qr, solve_lower};
use crate::prelude::*;

/// Relative cut on `|r_jj| / |r_11|` below which a pivot counts as zero.
pub const LSTSQ_RANK_TOL: f64 = 1e-12;

/// Minimum-norm least-squares solution of `min ‖AX - B‖_F`.
///
/// Pivoted QR truncated at `1e-12 |r_11|`, followed by a complete orthogonal
/// decomposition of the retained rows. Handles over- and underdetermined
/// systems.
pub fn least_squares<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let (m, n) = a.shape();
    if b.nrows() != m {
        return Err(Error::DimensionMismatch(format!(
            "least squares with A {m}x{n} and B {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let mut x = Matrix::zeros(n, b.ncols());
    if m == 0 || n == 0 {
        return Ok(x);
    }
    let f = pivoted_qr(a, None);
    let r11 = f.diag_profile.first().copied().unwrap_or_else(T::Real::zero);
    let cut = T::Real::lit(LSTSQ_RANK_TOL) * r11;
    let rank = f.diag_profile.iter().take_while(|&&d| d > cut && d > T::Real::zero()).count();
    if rank == 0 {
        return Ok(x);
    }
    let q1 = f.q.leading_cols(rank);
    let c = q1.adjoint_matmul(b);
    let r1 = f.r.block(0, 0, rank, n);

    // R1 = S^* W^* with R1^* = W S
    let cod = householder_qr(&r1.adjoint());
    let s_adj = cod.r.block(0, 0, rank, rank).adjoint();
    let w = solve_lower(&s_adj, &c);
    let z = cod.q.matmul(&w);

    for (pos, &col) in f.perm.iter().enumerate() {
        for k in 0..b.ncols() {
            x[(col, k)] = z[(pos, k)];
        }
    }
    Ok(x)
}
