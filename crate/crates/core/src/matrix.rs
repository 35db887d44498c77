//! Dense row-major matrices.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prelude::*;

/// Products with at least this many multiply-adds are split across rows.
const PAR_WORK: usize = 1 << 15;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Rectangular identity: ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            assert_eq!(r.as_ref().len(), n, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { rows: m, cols: n, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Square diagonal matrix.
    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Column vector.
    pub fn from_col(v: &[T]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[T]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.data[i * self.cols + j] = x;
        }
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        t
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_real(&self, s: T::Real) -> Self {
        self.map(|x| x.scale(s))
    }

    /// Promotes to complex entries.
    pub fn to_complex(&self) -> Matrix<Complex<T::Real>>
    where
        Complex<T::Real>: Scalar<Real = T::Real>,
    {
        self.map(|x| x.to_complex())
    }

    pub fn fro_norm(&self) -> T::Real {
        self.data.iter().map(|x| x.modulus_sqr()).fold(T::Real::zero(), |a, b| a + b).sqrt()
    }

    pub fn max_abs(&self) -> T::Real {
        self.data.iter().map(|x| x.modulus()).fold(T::Real::zero(), |a, b| a.max(b))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite_value())
    }

    /// Euclidean norms of the columns.
    pub fn col_norms(&self) -> Vec<T::Real> {
        let mut acc = vec![T::Real::zero(); self.cols];
        for i in 0..self.rows {
            for (a, x) in acc.iter_mut().zip(self.row(i)) {
                *a += x.modulus_sqr();
            }
        }
        acc.into_iter().map(|a| a.sqrt()).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            out.row_mut(r).copy_from_slice(self.row(i));
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            let src = self.row(i);
            for (c, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + c] = src[j];
            }
        }
        out
    }

    /// Contiguous block `[r0, r0+nr) x [c0, c0+nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "block out of range");
        let mut out = Self::zeros(nr, nc);
        for i in 0..nr {
            out.row_mut(i).copy_from_slice(&self.row(r0 + i)[c0..c0 + nc]);
        }
        out
    }

    pub fn leading_cols(&self, k: usize) -> Self {
        self.block(0, 0, self.rows, k.min(self.cols))
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let n = self.cols + other.cols;
        let mut out = Self::zeros(self.rows, n);
        for i in 0..self.rows {
            out.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
            out.row_mut(i)[self.cols..].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: {:?} x {:?}", self.shape(), other.shape());
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        if n == 0 {
            return out;
        }
        let kernel = |(i, orow): (usize, &mut [T])| {
            let arow = &self.data[i * k..(i + 1) * k];
            for (l, &a) in arow.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let brow = &other.data[l * n..(l + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        };
        if m * k * n >= PAR_WORK {
            out.data.par_chunks_mut(n).enumerate().for_each(kernel);
        } else {
            out.data.chunks_mut(n).enumerate().for_each(kernel);
        }
        out
    }

    /// `self^* * other` without forming the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "adjoint_matmul: {:?} x {:?}", self.shape(), other.shape());
        self.adjoint().matmul(other)
    }

    /// `self * other^*`.
    pub fn matmul_adjoint(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "matmul_adjoint: {:?} x {:?}", self.shape(), other.shape());
        self.matmul(&other.adjoint())
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `(self + self^*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let half = T::Real::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()).scale(half))
    }

    /// `‖A - A^*‖_F / ‖A‖_F`, zero for the zero matrix.
    pub fn hermitian_defect(&self) -> T::Real {
        let nrm = self.fro_norm();
        if nrm == T::Real::zero() {
            return nrm;
        }
        (self - &self.adjoint()).fro_norm() / nrm
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt) => {
        impl<T: Scalar> $tr<&Matrix<T>> for &Matrix<T> {
            type Output = Matrix<T>;
            fn $f(self, rhs: &Matrix<T>) -> Matrix<T> {
                assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
                Matrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a $op b).collect(),
                }
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl<T: Scalar> Mul<&Matrix<T>> for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}

/// Inner product `<x, y> = sum conj(x_i) y_i`.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a.conj() * b).sum()
}

pub fn norm2<T: Scalar>(x: &[T]) -> T::Real {
    x.iter().map(|v| v.modulus_sqr()).fold(T::Real::zero(), |a, b| a + b).sqrt()
}

/// Identity test helper: `‖Q^* Q - I‖_F`.
pub fn orthonormality_defect<T: Scalar>(q: &Matrix<T>) -> T::Real {
    let g = q.adjoint_matmul(q);
    (&g - &Matrix::identity(q.ncols())).fro_norm()
}
