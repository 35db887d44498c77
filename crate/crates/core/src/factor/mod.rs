//! Stage B: turning a range basis or raw sketches into standard
//! factorizations.

mod eig;
mod id;
mod onepass;
mod svd;

pub use eig::{
    direct_eig_hermitian, eig_nystrom, eig_nystrom_strict, eig_via_row_extraction, hermitian_probe,
    NystromFactors, NystromResult, HERMITIAN_PROBE_TOL,
};
pub use id::{column_id, row_id, two_sided_id, IdSide, InterpolativeDecomp, TwoSidedId, ID_RANK_TOL};
pub use onepass::{
    eig_one_pass, svd_one_pass_general, BasisChoice, OnePassDiagnostics, SampleBundle, ONE_PASS_COND_WARN,
    ONE_PASS_UNKNOWN_CAP,
};
pub use svd::{direct_svd, svd_via_row_extraction};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{householder_qr, small_svd};
use crate::prelude::*;

/// `A ≈ U diag(sigma) V^*`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSvd<T: Scalar> {
    pub u: Matrix<T>,
    pub sigma: Vec<T::Real>,
    pub v: Matrix<T>,
}

impl<T: Scalar> PartialSvd<T> {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        let us = Matrix::from_fn(self.u.nrows(), self.rank(), |i, j| self.u[(i, j)].scale(self.sigma[j]));
        us.matmul_adjoint(&self.v)
    }

    /// Largest imaginary part of any entry of `U Σ V^*`. Zero for real
    /// factors; for complex factors of a real input it measures how far
    /// the approximation is from real.
    pub fn max_imag_residual(&self) -> T::Real {
        self.reconstruct().as_slice().iter().fold(T::Real::zero(), |m, z| m.max(z.im().abs()))
    }
}

/// `A ≈ U diag(lambda) U^*` for Hermitian `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialEig<T: Scalar> {
    pub u: Matrix<T>,
    pub lambda: Vec<T::Real>,
}

impl<T: Scalar> PartialEig<T> {
    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        let ul = Matrix::from_fn(self.u.nrows(), self.rank(), |i, j| self.u[(i, j)].scale(self.lambda[j]));
        ul.matmul_adjoint(&self.u)
    }
}

/// `A ≈ Q R` with orthonormal `Q` and upper-trapezoidal `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialQr<T: Scalar> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

/// Keeping only the leading `k` spectral terms.
pub trait Truncate: Sized {
    fn truncate(&self, k: usize) -> Self;
}

impl<T: Scalar> Truncate for PartialSvd<T> {
    fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.rank());
        PartialSvd { u: self.u.leading_cols(k), sigma: self.sigma[..k].to_vec(), v: self.v.leading_cols(k) }
    }
}

impl<T: Scalar> Truncate for PartialEig<T> {
    /// Keeps the `k` eigenvalues of largest magnitude.
    fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.rank());
        let mut order: Vec<usize> = (0..self.rank()).collect();
        order.sort_by(|&i, &j| {
            self.lambda[j].abs().partial_cmp(&self.lambda[i].abs()).unwrap_or(std::cmp::Ordering::Equal)
        });
        order.truncate(k);
        PartialEig { u: self.u.select_cols(&order), lambda: order.iter().map(|&i| self.lambda[i]).collect() }
    }
}

/// Rank-`k` truncation of a partial SVD or eigendecomposition.
pub fn truncate_rank<F: Truncate>(f: &F, k: usize) -> F {
    f.truncate(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvertTarget {
    Qr,
    Svd,
    Id,
}

#[derive(Clone, Debug)]
pub enum Converted<T: Scalar> {
    Qr(PartialQr<T>),
    Svd(PartialSvd<T>),
    /// Column ID of `B`; the skeleton of `A ≈ CB` is `C B(:, J)`.
    Id(InterpolativeDecomp<T>),
}

/// Converts `A ≈ C B` (`C` is `m x k`, `B` is `k x n`) into a partial QR,
/// SVD or column ID.
pub fn convert_cb<T: Scalar>(c: &Matrix<T>, b: &Matrix<T>, target: ConvertTarget) -> Result<Converted<T>> {
    if c.ncols() != b.nrows() {
        return Err(crate::Error::DimensionMismatch(format!(
            "C is {}x{} but B is {}x{}",
            c.nrows(),
            c.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(match target {
        ConvertTarget::Qr => {
            let f1 = householder_qr(c);
            let d = f1.r.matmul(b);
            let f2 = householder_qr(&d);
            Converted::Qr(PartialQr { q: f1.q.matmul(&f2.q), r: f2.r })
        }
        ConvertTarget::Svd => {
            let f1 = householder_qr(c);
            let d = f1.r.matmul(b);
            let s = small_svd(&d)?;
            Converted::Svd(PartialSvd { u: f1.q.matmul(&s.u), sigma: s.sigma, v: s.v })
        }
        ConvertTarget::Id => Converted::Id(column_id(b, b.nrows().min(b.ncols()))?),
    })
}
