use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{householder_qr, pivoted_qr_with, solve_upper, PivotOptions};
use crate::prelude::*;

/// Pivots with `|r_jj| <= ID_RANK_TOL * |r_11|` are treated as zero.
pub const ID_RANK_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdSide {
    /// `M ≈ X M(J, :)`, `X` is `m x k`.
    Row,
    /// `M ≈ M(:, J) X`, `X` is `k x n`.
    Column,
}

/// Interpolative decomposition with `X(J, :) = I` (row side) or
/// `X(:, J) = I` (column side).
#[derive(Clone, Debug)]
pub struct InterpolativeDecomp<T: Scalar> {
    pub j: Vec<usize>,
    pub x: Matrix<T>,
    pub side: IdSide,
    /// Swaps performed by the refinement.
    pub swaps: usize,
}

impl<T: Scalar> InterpolativeDecomp<T> {
    pub fn rank(&self) -> usize {
        self.j.len()
    }

    pub fn skeleton(&self, m: &Matrix<T>) -> Matrix<T> {
        match self.side {
            IdSide::Row => m.select_rows(&self.j),
            IdSide::Column => m.select_cols(&self.j),
        }
    }

    pub fn reconstruct(&self, m: &Matrix<T>) -> Matrix<T> {
        match self.side {
            IdSide::Row => self.x.matmul(&self.skeleton(m)),
            IdSide::Column => self.skeleton(m).matmul(&self.x),
        }
    }

    pub fn max_coefficient(&self) -> T::Real {
        self.x.max_abs()
    }
}

/// Swap budget of the refinement: `ceil(3 k ln n)`, at least one.
pub fn refinement_cap(k: usize, n: usize) -> usize {
    let c = (3.0 * k as f64 * (n.max(1) as f64).ln()).ceil();
    (c as usize).max(1)
}

/// `T` with `a(:, rest) ≈ a(:, active) T`.
fn coefficients<T: Scalar>(a: &Matrix<T>, active: &[usize], rest: &[usize]) -> Matrix<T> {
    let f = householder_qr(&a.select_cols(active));
    solve_upper(&f.r, &f.q.adjoint_matmul(&a.select_cols(rest)))
}

/// Column ID `A ≈ A(:, J) X` of rank `k`.
///
/// Pivoted QR picks the initial skeleton, then pivots are exchanged with
/// non-skeleton columns while some coefficient exceeds 2 in magnitude.
/// When `k` exceeds the numerical rank, the surplus skeleton columns get
/// identity coefficients and zeros elsewhere.
pub fn column_id<T: Scalar>(a: &Matrix<T>, k: usize) -> Result<InterpolativeDecomp<T>> {
    let (m, n) = a.shape();
    if k > m.min(n) {
        return Err(Error::InvalidArgument(format!("ID rank {k} exceeds the dimensions {m}x{n}")));
    }
    if !a.all_finite() {
        return Err(Error::NonFinite("ID input".into()));
    }
    if k == 0 {
        return Ok(InterpolativeDecomp { j: vec![], x: Matrix::zeros(0, n), side: IdSide::Column, swaps: 0 });
    }
    let f = pivoted_qr_with(a, PivotOptions { tol: None, max_rank: Some(k) });
    let top = f.diag_profile[0];
    let keff = f.diag_profile.iter().take_while(|&&d| d > T::Real::lit(ID_RANK_TOL) * top).count();
    let mut active: Vec<usize> = f.perm[..keff].to_vec();
    let surplus: Vec<usize> = f.perm[keff..k].to_vec();
    let mut rest: Vec<usize> = f.perm[k..].to_vec();

    let two = T::Real::lit(2.0);
    let cap = refinement_cap(k, n);
    let mut swaps = 0;
    let mut t = Matrix::zeros(keff, rest.len());
    if keff > 0 && !rest.is_empty() {
        loop {
            t = coefficients(a, &active, &rest);
            let mut best = (0, 0, T::Real::zero());
            for i in 0..keff {
                for c in 0..rest.len() {
                    let v = t[(i, c)].modulus();
                    if v > best.2 {
                        best = (i, c, v);
                    }
                }
            }
            if best.2 <= two {
                break;
            }
            if swaps == cap {
                return Err(Error::RefinementCap { cap });
            }
            std::mem::swap(&mut active[best.0], &mut rest[best.1]);
            swaps += 1;
        }
    }

    let mut j = active.clone();
    j.extend_from_slice(&surplus);
    let mut x = Matrix::zeros(k, n);
    for (i, &col) in j.iter().enumerate() {
        x[(i, col)] = T::one();
    }
    for (c, &col) in rest.iter().enumerate() {
        for i in 0..keff {
            x[(i, col)] = t[(i, c)];
        }
    }
    Ok(InterpolativeDecomp { j, x, side: IdSide::Column, swaps })
}

/// Row ID `M ≈ X M(J, :)`, computed as the column ID of `M^*`.
pub fn row_id<T: Scalar>(m: &Matrix<T>, k: usize) -> Result<InterpolativeDecomp<T>> {
    let c = column_id(&m.adjoint(), k)?;
    Ok(InterpolativeDecomp { j: c.j, x: c.x.adjoint(), side: IdSide::Row, swaps: c.swaps })
}

/// `A ≈ W A(I, J) X`.
#[derive(Clone, Debug)]
pub struct TwoSidedId<T: Scalar> {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub w: Matrix<T>,
    pub x: Matrix<T>,
}

impl<T: Scalar> TwoSidedId<T> {
    pub fn reconstruct(&self, a: &Matrix<T>) -> Matrix<T> {
        self.w.matmul(&a.select_rows(&self.rows).select_cols(&self.cols)).matmul(&self.x)
    }
}

/// Column ID `A ≈ A(:, J) X` followed by a row ID of the skeleton
/// `A(:, J) ≈ W A(I, J)`.
pub fn two_sided_id<T: Scalar>(a: &Matrix<T>, k: usize) -> Result<TwoSidedId<T>> {
    let col = column_id(a, k)?;
    let skel = a.select_cols(&col.j);
    let row = row_id(&skel, k)?;
    Ok(TwoSidedId { rows: row.j, cols: col.j, w: row.x, x: col.x })
}
