use crate::linalg::householder::{accumulate, from_cols, to_cols, Reflector};
use crate::matrix::{norm2, Matrix};
use crate::prelude::*;

/// Default relative threshold below which a column is treated as numerically
/// dependent during orthonormalization.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QrMode {
    /// `Q` is `m x min(m,n)`, `R` is `min(m,n) x n`.
    #[default]
    Economy,
    /// `Q` is `m x m`, `R` is `m x n`.
    Full,
}

#[derive(Clone, Debug)]
pub struct QrFactors<T: Scalar> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

/// Economy Householder QR with nonnegative real diagonal in `R`.
pub fn householder_qr<T: Scalar>(a: &Matrix<T>) -> QrFactors<T> {
    householder_qr_with(a, QrMode::Economy)
}

pub fn householder_qr_with<T: Scalar>(a: &Matrix<T>, mode: QrMode) -> QrFactors<T> {
    let (m, n) = a.shape();
    let steps = m.min(n);
    let mut cols = to_cols(a);
    let mut refl: Vec<Option<Reflector<T>>> = Vec::with_capacity(steps);
    for j in 0..steps {
        let (h, beta) = Reflector::annihilate(&cols[j][j..], j);
        if let Some(h) = &h {
            for c in cols.iter_mut().skip(j + 1) {
                h.apply(c);
            }
        }
        cols[j][j] = beta;
        for v in cols[j][j + 1..].iter_mut() {
            *v = T::zero();
        }
        refl.push(h);
    }

    let qcols = match mode {
        QrMode::Economy => steps,
        QrMode::Full => m,
    };
    let mut q = accumulate(m, qcols, &refl);
    let mut r = Matrix::from_fn(qcols, n, |i, j| if i < m { cols[j][i] } else { T::zero() });

    // r_jj >= 0: scale row j of R by conj(phase) and column j of Q by phase
    for j in 0..steps {
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
    }
    QrFactors { q: from_cols(m, &q), r }
}

/// Orthonormal basis for the numerical range of `y`.
///
/// Classical Gram-Schmidt with one full reorthogonalization per column.
/// A column whose residual after both sweeps is at most `tol * ‖Y‖_F` is
/// dropped, so the result may have fewer columns than `y`.
pub fn orthonormalize_double_gs<T: Scalar>(y: &Matrix<T>, tol: T::Real) -> Matrix<T> {
    let m = y.nrows();
    let thresh = tol * y.fro_norm();
    let mut basis: Vec<Vec<T>> = Vec::new();
    for j in 0..y.ncols() {
        let mut v = y.col(j);
        if v.iter().all(|x| *x == T::zero()) {
            continue;
        }
        for _ in 0..2 {
            project_out(&basis, &mut v);
        }
        let nrm = norm2(&v);
        if nrm <= thresh || nrm == T::Real::zero() {
            continue;
        }
        let inv = nrm.recip();
        v.iter_mut().for_each(|x| *x = x.scale(inv));
        basis.push(v);
    }
    from_cols(m, &basis)
}

/// `v <- v - Q (Q^* v)` in classical Gram-Schmidt form.
pub(crate) fn project_out<T: Scalar>(basis: &[Vec<T>], v: &mut [T]) {
    let coeffs: Vec<T> = basis
        .iter()
        .map(|q| q.iter().zip(v.iter()).map(|(&a, &b)| a.conj() * b).sum())
        .collect();
    for (q, c) in basis.iter().zip(coeffs) {
        if c == T::zero() {
            continue;
        }
        for (x, &qi) in v.iter_mut().zip(q) {
            *x -= qi * c;
        }
    }
}

/// Appends the columns of `y` to the orthonormal `q`, reorthogonalizing and
/// dropping dependent columns as in [`orthonormalize_double_gs`]. The
/// threshold is absolute.
pub fn extend_basis<T: Scalar>(q: &Matrix<T>, y: &Matrix<T>, abs_tol: T::Real) -> Matrix<T> {
    let m = q.nrows().max(y.nrows());
    let mut basis: Vec<Vec<T>> = (0..q.ncols()).map(|j| q.col(j)).collect();
    for j in 0..y.ncols() {
        let mut v = y.col(j);
        for _ in 0..2 {
            project_out(&basis, &mut v);
        }
        let nrm = norm2(&v);
        if nrm <= abs_tol || nrm == T::Real::zero() {
            continue;
        }
        let inv = nrm.recip();
        v.iter_mut().for_each(|x| *x = x.scale(inv));
        basis.push(v);
    }
    from_cols(m, &basis)
}

/// Solves `R x = b` for upper-triangular `R` (leading `k x k` block).
/// Zero diagonal entries give zero solution components.
pub fn solve_upper<T: Scalar>(r: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let k = r.nrows().min(r.ncols());
    let mut x = Matrix::zeros(k, b.ncols());
    for c in 0..b.ncols() {
        for i in (0..k).rev() {
            let mut s = b[(i, c)];
            for l in i + 1..k {
                s -= r[(i, l)] * x[(l, c)];
            }
            let d = r[(i, i)];
            x[(i, c)] = if d == T::zero() { T::zero() } else { s / d };
        }
    }
    x
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower<T: Scalar>(l: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let k = l.nrows().min(l.ncols());
    let mut x = Matrix::zeros(k, b.ncols());
    for c in 0..b.ncols() {
        for i in 0..k {
            let mut s = b[(i, c)];
            for j in 0..i {
                s -= l[(i, j)] * x[(j, c)];
            }
            let d = l[(i, i)];
            x[(i, c)] = if d == T::zero() { T::zero() } else { s / d };
        }
    }
    x
}

/// Relative tolerance helper used across the crate.
pub fn default_rank_tol<R: RealScalar>() -> R {
    R::lit(DEFAULT_RANK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::orthonormality_defect;
    use crate::sketch::gaussian_matrix;
    use crate::c64;

    #[test]
    fn identity_factors_trivially() {
        let f = householder_qr(&Matrix::<f64>::identity(3));
        assert!((&f.q - &Matrix::identity(3)).max_abs() < 1e-15);
        assert!((&f.r - &Matrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn pythagorean_column() {
        let f = householder_qr(&Matrix::from_rows(&[[3.0], [4.0]]));
        assert!((f.r[(0, 0)] - 5.0).abs() < 1e-15);
        assert!((f.q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((f.q[(1, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn random_8x5_reconstructs() {
        let a: Matrix<f64> = gaussian_matrix(8, 5, 11);
        let f = householder_qr(&a);
        assert!((&f.q.matmul(&f.r) - &a).fro_norm() <= 1e-13 * a.fro_norm());
        assert!(orthonormality_defect(&f.q) <= 1e-13);
    }

    #[test]
    fn complex_full_mode() {
        let a: Matrix<c64> = gaussian_matrix(6, 3, 2);
        let f = householder_qr_with(&a, QrMode::Full);
        assert_eq!(f.q.shape(), (6, 6));
        assert_eq!(f.r.shape(), (6, 3));
        assert!((&f.q.matmul(&f.r) - &a).fro_norm() <= 1e-13 * a.fro_norm());
        assert!(orthonormality_defect(&f.q) <= 1e-13);
        for j in 0..3 {
            assert!(f.r[(j, j)].im == 0.0 && f.r[(j, j)].re >= 0.0);
        }
    }

    #[test]
    fn wide_matrix() {
        let a: Matrix<f64> = gaussian_matrix(3, 7, 5);
        let f = householder_qr(&a);
        assert_eq!(f.q.shape(), (3, 3));
        assert!((&f.q.matmul(&f.r) - &a).fro_norm() <= 1e-13 * a.fro_norm());
    }

    #[test]
    fn gs_drops_collinear_columns() {
        let q = orthonormalize_double_gs(&Matrix::from_rows(&[[1.0, 2.0], [0.0, 0.0]]), 1e-10);
        assert_eq!(q.shape(), (2, 1));
        assert!((q[(0, 0)].abs() - 1.0).abs() < 1e-15 && q[(1, 0)] == 0.0);
    }

    #[test]
    fn gs_identity() {
        let q = orthonormalize_double_gs(&Matrix::<f64>::identity(4), 1e-10);
        assert!((&q - &Matrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn gs_zero_gives_empty_basis() {
        let q = orthonormalize_double_gs(&Matrix::<f64>::zeros(5, 3), 1e-10);
        assert_eq!(q.shape(), (5, 0));
    }

    #[test]
    fn gs_near_dependent_column() {
        let mut y: Matrix<f64> = gaussian_matrix(100, 10, 9);
        let c0 = y.col(0);
        let c1: Vec<f64> = c0.iter().map(|x| 1e-14 * x).collect();
        y.set_col(1, &c1);
        let q = orthonormalize_double_gs(&y, 1e-10);
        assert_eq!(q.ncols(), 9);
        assert!(orthonormality_defect(&q) < 1e-13);
        let sv = crate::linalg::small_svd(&y).unwrap().sigma;
        let rank = sv.iter().filter(|&&s| s > 1e-10 * sv[0]).count();
        assert_eq!(rank, 9);
    }
}
