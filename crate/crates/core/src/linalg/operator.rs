//! Matrix-free linear operators with pass accounting.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::matrix::{norm2, Matrix};
use crate::rng::{rng_for, stream};
use crate::prelude::*;

/// Work performed through an operator.
///
/// Each call to `apply` or `apply_adjoint` is one pass over the data,
/// regardless of how many vectors it carries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OpCounters {
    pub matvecs: u64,
    pub adjoint_matvecs: u64,
    pub passes: u64,
    pub flops: u64,
}

impl OpCounters {
    pub fn since(&self, earlier: &OpCounters) -> OpCounters {
        OpCounters {
            matvecs: self.matvecs - earlier.matvecs,
            adjoint_matvecs: self.adjoint_matvecs - earlier.adjoint_matvecs,
            passes: self.passes - earlier.passes,
            flops: self.flops - earlier.flops,
        }
    }
}

/// `x -> A x` and `y -> A^* y` on blocks of vectors stored as matrix columns.
pub trait LinearOperator<T: Scalar>: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A X` for an `n x k` block `X`.
    fn apply(&self, x: &Matrix<T>) -> Matrix<T>;
    /// `A^* Y` for an `m x k` block `Y`.
    fn apply_adjoint(&self, y: &Matrix<T>) -> Matrix<T>;
    /// Counters accumulated so far. Operators that do not count report zeros.
    fn counters(&self) -> OpCounters {
        OpCounters::default()
    }
}

impl<T: Scalar> LinearOperator<T> for Matrix<T> {
    fn nrows(&self) -> usize {
        Matrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        Matrix::ncols(self)
    }
    fn apply(&self, x: &Matrix<T>) -> Matrix<T> {
        self.matmul(x)
    }
    fn apply_adjoint(&self, y: &Matrix<T>) -> Matrix<T> {
        self.adjoint_matmul(y)
    }
}

impl<T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &Matrix<T>) -> Matrix<T> {
        (**self).apply(x)
    }
    fn apply_adjoint(&self, y: &Matrix<T>) -> Matrix<T> {
        (**self).apply_adjoint(y)
    }
    fn counters(&self) -> OpCounters {
        (**self).counters()
    }
}

/// Wraps any operator and counts passes, matvecs and multiply-adds.
///
/// The flop count assumes dense cost `m * n` per vector.
#[derive(Debug)]
pub struct Counted<O> {
    inner: O,
    matvecs: AtomicU64,
    adjoint_matvecs: AtomicU64,
    passes: AtomicU64,
    flops: AtomicU64,
}

impl<O> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            matvecs: AtomicU64::new(0),
            adjoint_matvecs: AtomicU64::new(0),
            passes: AtomicU64::new(0),
            flops: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn reset(&self) {
        for c in [&self.matvecs, &self.adjoint_matvecs, &self.passes, &self.flops] {
            c.store(0, Ordering::Relaxed);
        }
    }
}

impl<T: Scalar, O: LinearOperator<T>> LinearOperator<T> for Counted<O> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply(&self, x: &Matrix<T>) -> Matrix<T> {
        let k = x.ncols() as u64;
        self.matvecs.fetch_add(k, Ordering::Relaxed);
        self.passes.fetch_add(1, Ordering::Relaxed);
        self.flops.fetch_add(k * (self.nrows() * self.ncols()) as u64, Ordering::Relaxed);
        self.inner.apply(x)
    }
    fn apply_adjoint(&self, y: &Matrix<T>) -> Matrix<T> {
        let k = y.ncols() as u64;
        self.adjoint_matvecs.fetch_add(k, Ordering::Relaxed);
        self.passes.fetch_add(1, Ordering::Relaxed);
        self.flops.fetch_add(k * (self.nrows() * self.ncols()) as u64, Ordering::Relaxed);
        self.inner.apply_adjoint(y)
    }
    fn counters(&self) -> OpCounters {
        OpCounters {
            matvecs: self.matvecs.load(Ordering::Relaxed),
            adjoint_matvecs: self.adjoint_matvecs.load(Ordering::Relaxed),
            passes: self.passes.load(Ordering::Relaxed),
            flops: self.flops.load(Ordering::Relaxed),
        }
    }
}

/// Dense matrix with counters.
pub type DenseOperator<'a, T> = Counted<&'a Matrix<T>>;

pub fn dense_operator<T: Scalar>(a: &Matrix<T>) -> DenseOperator<'_, T> {
    Counted::new(a)
}

/// Operator from a pair of closures.
pub struct FnOperator<F, G> {
    m: usize,
    n: usize,
    fwd: F,
    adj: G,
}

impl<F, G> FnOperator<F, G> {
    pub fn new(m: usize, n: usize, fwd: F, adj: G) -> Self {
        Self { m, n, fwd, adj }
    }
}

impl<T, F, G> LinearOperator<T> for FnOperator<F, G>
where
    T: Scalar,
    F: Fn(&Matrix<T>) -> Matrix<T> + Sync,
    G: Fn(&Matrix<T>) -> Matrix<T> + Sync,
{
    fn nrows(&self) -> usize {
        self.m
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &Matrix<T>) -> Matrix<T> {
        (self.fwd)(x)
    }
    fn apply_adjoint(&self, y: &Matrix<T>) -> Matrix<T> {
        (self.adj)(y)
    }
}

/// `c A` for a real scalar `c`.
pub struct Scaled<O, R> {
    pub inner: O,
    pub factor: R,
}

impl<T: Scalar, O: LinearOperator<T>> LinearOperator<T> for Scaled<O, T::Real> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply(&self, x: &Matrix<T>) -> Matrix<T> {
        self.inner.apply(x).scale_real(self.factor)
    }
    fn apply_adjoint(&self, y: &Matrix<T>) -> Matrix<T> {
        self.inner.apply_adjoint(y).scale_real(self.factor)
    }
    fn counters(&self) -> OpCounters {
        self.inner.counters()
    }
}

/// Relative adjoint mismatch `|<Ax, y> - <x, A^*y>| / (‖Ax‖‖y‖ + ‖x‖‖A^*y‖)`
/// on one random pair of vectors.
pub fn adjoint_mismatch<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, seed: u64) -> T::Real {
    let x: Matrix<T> = crate::sketch::gaussian_matrix(op.ncols(), 1, seed);
    let y: Matrix<T> = crate::sketch::gaussian_matrix(op.nrows(), 1, crate::rng::mix(seed, 1));
    let ax = op.apply(&x);
    let ay = op.apply_adjoint(&y);
    let lhs = crate::matrix::dot(ax.as_slice(), y.as_slice());
    let rhs = crate::matrix::dot(x.as_slice(), ay.as_slice());
    let denom = norm2(ax.as_slice()) * norm2(y.as_slice()) + norm2(x.as_slice()) * norm2(ay.as_slice());
    if denom == T::Real::zero() {
        return T::Real::zero();
    }
    (lhs - rhs).modulus() / denom
}

/// Lower estimate of `‖A‖` from `iters` steps of the power method on
/// `A^* A` with a random start. The running maximum of `‖A x‖` over unit
/// iterates is returned, so the estimate never decreases with `iters`.
pub fn spectral_norm_estimate<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    iters: usize,
    seed: u64,
) -> T::Real {
    let n = op.ncols();
    if n == 0 || op.nrows() == 0 {
        return T::Real::zero();
    }
    let mut rng = rng_for(seed, stream::NORM_ESTIMATE);
    let mut x = Matrix::from_fn(n, 1, |_, _| T::sample_gaussian(&mut rng));
    let mut best = T::Real::zero();
    for _ in 0..iters.max(1) {
        let nx = norm2(x.as_slice());
        if nx == T::Real::zero() {
            break;
        }
        x = x.scale_real(nx.recip());
        let y = op.apply(&x);
        let ny = norm2(y.as_slice());
        if ny > best {
            best = ny;
        }
        if ny == T::Real::zero() {
            break;
        }
        x = op.apply_adjoint(&y);
    }
    best
}
