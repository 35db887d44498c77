use crate::linalg::householder::{accumulate, col_norm, from_cols, to_cols, Reflector};
use crate::prelude::*;

/// Column-pivoted QR: `A(:, perm) ≈ Q R`.
///
/// `r` is stored in pivoted column order, so it is upper triangular as
/// stored. `rank` is the number of Householder steps taken before the
/// remaining columns fell below the halting tolerance.
#[derive(Clone, Debug)]
pub struct PivotedQrFactors<T: Scalar> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
    pub perm: Vec<usize>,
    pub diag_profile: Vec<T::Real>,
    pub rank: usize,
}

impl<T: Scalar> PivotedQrFactors<T> {
    /// `R` with columns returned to their original positions.
    pub fn r_unpermuted(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.r.nrows(), self.r.ncols());
        for (c, &j) in self.perm.iter().enumerate() {
            for i in 0..self.r.nrows() {
                out[(i, j)] = self.r[(i, c)];
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PivotOptions<R> {
    /// Stop once the Frobenius norm of the unreduced columns is `<= tol`.
    pub tol: Option<R>,
    /// Stop after this many steps.
    pub max_rank: Option<usize>,
}

pub fn pivoted_qr<T: Scalar>(a: &Matrix<T>, tol: Option<T::Real>) -> PivotedQrFactors<T> {
    pivoted_qr_with(a, PivotOptions { tol, max_rank: None })
}

/// Businger-Golub Householder QR with column pivoting.
///
/// Residual column norms are recomputed exactly at every step. Ties go to
/// the lowest column index.
pub fn pivoted_qr_with<T: Scalar>(a: &Matrix<T>, opts: PivotOptions<T::Real>) -> PivotedQrFactors<T> {
    let (m, n) = a.shape();
    let mut cols = to_cols(a);
    let mut perm: Vec<usize> = (0..n).collect();
    let limit = opts.max_rank.unwrap_or(usize::MAX).min(m).min(n);
    let mut refl = Vec::with_capacity(limit);
    let mut diag = Vec::with_capacity(limit);

    let mut step = 0;
    while step < limit {
        let norms: Vec<T::Real> = cols[step..].iter().map(|c| col_norm(&c[step..])).collect();
        if let Some(tol) = opts.tol {
            let rest = norms.iter().fold(T::Real::zero(), |s, &x| s + x * x).sqrt();
            if rest <= tol {
                break;
            }
        }
        let mut best = 0;
        for (i, &v) in norms.iter().enumerate() {
            if v > norms[best] {
                best = i;
            }
        }
        let p = step + best;
        cols.swap(step, p);
        perm.swap(step, p);

        let (h, beta) = Reflector::annihilate(&cols[step][step..], step);
        if let Some(h) = &h {
            for c in cols.iter_mut().skip(step + 1) {
                h.apply(c);
            }
        }
        cols[step][step] = beta;
        for v in cols[step][step + 1..].iter_mut() {
            *v = T::zero();
        }
        refl.push(h);
        step += 1;
    }

    let mut q = accumulate(m, step, &refl);
    let mut r = Matrix::from_fn(step, n, |i, j| cols[j][i]);
    for j in 0..step {
        let ph = r[(j, j)].phase();
        if ph != T::one() {
            for c in j..n {
                r[(j, c)] = ph.conj() * r[(j, c)];
            }
            for v in q[j].iter_mut() {
                *v *= ph;
            }
        }
        r[(j, j)] = T::from_real(r[(j, j)].re());
        diag.push(r[(j, j)].modulus());
    }
    PivotedQrFactors { q: from_cols(m, &q), r, perm, diag_profile: diag, rank: step }
}
