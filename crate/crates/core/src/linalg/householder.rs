//! Householder reflectors on column-major scratch storage.

use crate::prelude::*;

/// `H = I - coef * v v^*`, acting on entries `start..` of a column.
#[derive(Clone, Debug)]
pub(crate) struct Reflector<T: Scalar> {
    pub start: usize,
    pub v: Vec<T>,
    pub coef: T::Real,
}

impl<T: Scalar> Reflector<T> {
    /// Reflector mapping `x` onto `beta e_1`, with `beta = -phase(x_0) ‖x‖`.
    /// Returns `None` for a zero column.
    pub fn annihilate(x: &[T], start: usize) -> (Option<Self>, T) {
        let nrm = col_norm(x);
        if nrm == T::Real::zero() {
            return (None, T::zero());
        }
        let alpha = x[0];
        let beta = -(alpha.phase().scale(nrm));
        let mut v = x.to_vec();
        v[0] -= beta;
        let vv = col_norm(&v);
        if vv == T::Real::zero() {
            return (None, beta);
        }
        let coef = T::Real::lit(2.0) / (vv * vv);
        (Some(Self { start, v, coef }), beta)
    }

    /// Applies `H` to `col[start..]`.
    #[inline]
    pub fn apply(&self, col: &mut [T]) {
        let seg = &mut col[self.start..self.start + self.v.len()];
        let mut s = T::zero();
        for (a, b) in self.v.iter().zip(seg.iter()) {
            s += a.conj() * *b;
        }
        if s == T::zero() {
            return;
        }
        let s = s.scale(self.coef);
        for (a, b) in self.v.iter().zip(seg.iter_mut()) {
            *b -= *a * s;
        }
    }
}

pub(crate) fn col_norm<T: Scalar>(x: &[T]) -> T::Real {
    // scaled accumulation keeps tiny and huge columns representable
    let amax = x.iter().map(|v| v.modulus()).fold(T::Real::zero(), |a, b| a.max(b));
    if amax == T::Real::zero() || !amax.is_finite() {
        return amax;
    }
    let inv = amax.recip();
    let s = x
        .iter()
        .map(|v| v.scale(inv).modulus_sqr())
        .fold(T::Real::zero(), |a, b| a + b);
    amax * s.sqrt()
}

/// Column-major copy.
pub(crate) fn to_cols<T: Scalar>(a: &Matrix<T>) -> Vec<Vec<T>> {
    (0..a.ncols()).map(|j| a.col(j)).collect()
}

pub(crate) fn from_cols<T: Scalar>(rows: usize, cols: &[Vec<T>]) -> Matrix<T> {
    let n = cols.len();
    Matrix::from_fn(rows, n, |i, j| cols[j][i])
}

/// Applies `H_0 H_1 ... H_{k-1}` to the first `ncols` columns of the identity.
pub(crate) fn accumulate<T: Scalar>(m: usize, ncols: usize, refl: &[Option<Reflector<T>>]) -> Vec<Vec<T>> {
    let mut q: Vec<Vec<T>> = (0..ncols)
        .map(|j| {
            let mut c = vec![T::zero(); m];
            c[j] = T::one();
            c
        })
        .collect();
    for h in refl.iter().rev().flatten() {
        for c in q.iter_mut() {
            h.apply(c);
        }
    }
    q
}
