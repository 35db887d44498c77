//! Stage A: orthonormal bases that capture the range of an operator.

use std::collections::VecDeque;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::householder::from_cols;
use crate::linalg::qr::project_out;
use crate::linalg::{default_rank_tol, orthonormalize_double_gs, LinearOperator, OpCounters};
use crate::matrix::norm2;
use crate::prelude::*;
use crate::rng::{rng_for, stream, Rng};
use crate::sketch::{
    gaussian_matrix, gaussian_matrix_stream, haar_orthonormal, GsrftOperator, SketchKind, SketchSpec,
    SrftOperator,
};

/// Default probe count for the adaptive finder and the posterior estimate.
pub const DEFAULT_PROBES: usize = 10;
/// Default inflation factor of the posterior estimate.
pub const DEFAULT_ALPHA: f64 = 10.0;
/// Default oversampling for fixed-rank runs.
pub const DEFAULT_OVERSAMPLE: usize = 5;
/// Default block size of the blocked adaptive finder.
pub const DEFAULT_BLOCK: usize = 8;

/// `sqrt(2/pi)`, the mean of `|g|` for a standard normal `g`.
pub fn sqrt_two_over_pi<R: RealScalar>() -> R {
    (R::lit(2.0) / R::PI()).sqrt()
}

/// Orthonormal `Q` with `A ≈ QQ^*A`, and how it was obtained.
#[derive(Clone, Debug)]
pub struct RangeBasis<T: Scalar> {
    pub q: Matrix<T>,
    /// Number of random test vectors drawn.
    pub samples_used: usize,
    /// Passes over `A`: 1 for a plain sketch, `2q + 1` for power schemes.
    pub passes: u64,
    /// Vectors pushed through `A` or `A^*`.
    pub matvecs: u64,
    pub est_error: Option<T::Real>,
    pub spec: SketchSpec,
    /// The basis reached `min(m, n)` columns before the tolerance was met.
    pub saturated: bool,
    /// Operator counters accumulated during construction.
    pub work: OpCounters,
    /// Per-step record of the adaptive finder; empty for fixed-rank runs.
    pub trace: Vec<AdaptiveStep<T::Real>>,
}

impl<T: Scalar> RangeBasis<T> {
    pub fn rank(&self) -> usize {
        self.q.ncols()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveStep<R> {
    /// Basis size after the step.
    pub ell: usize,
    /// Largest pending probe norm `max ‖y^(i)‖`.
    pub max_probe_norm: R,
    /// `10 sqrt(2/pi) max ‖y^(i)‖`.
    pub estimate: R,
}

fn check_ell<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, ell: usize) -> Result<()> {
    let cap = op.nrows().min(op.ncols());
    if ell == 0 || ell > cap {
        return Err(Error::InvalidArgument(format!(
            "sample count {ell} must lie in 1..={cap} for a {}x{} operator",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

fn basis_from_samples<T: Scalar>(y: &Matrix<T>, tol: T::Real) -> (Matrix<T>, Option<T::Real>) {
    let q = orthonormalize_double_gs(y, tol);
    let est = (q.ncols() == 0).then(T::Real::zero);
    (q, est)
}

/// Test matrix for the unstructured kinds.
pub fn test_matrix<T: Scalar>(kind: SketchKind, n: usize, ell: usize, seed: u64) -> Result<Matrix<T>> {
    match kind {
        SketchKind::Gaussian => Ok(gaussian_matrix(n, ell, seed)),
        SketchKind::Ortho => Ok(haar_orthonormal(n, ell, seed)),
        _ => Err(Error::InvalidArgument(format!("{kind} sketches need dense row access"))),
    }
}

/// Basic randomized range finder: `Q = orth(A Ω)` with Gaussian `Ω`.
pub fn randomized_range_finder<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    ell: usize,
    seed: u64,
) -> Result<RangeBasis<T>> {
    power_iteration_range_with(op, ell, 0, seed, default_rank_tol())
}

/// Power scheme: `Y = (AA^*)^q A Ω`, orthonormalized once at the end.
pub fn power_iteration_range<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    ell: usize,
    q: usize,
    seed: u64,
) -> Result<RangeBasis<T>> {
    power_iteration_range_with(op, ell, q, seed, default_rank_tol())
}

/// [`power_iteration_range`] with an explicit relative drop tolerance for
/// the final orthonormalization.
pub fn power_iteration_range_with<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    ell: usize,
    q: usize,
    seed: u64,
    tol: T::Real,
) -> Result<RangeBasis<T>> {
    check_ell(op, ell)?;
    let omega: Matrix<T> = gaussian_matrix(op.ncols(), ell, seed);
    let spec = SketchSpec { kind: SketchKind::Gaussian, ell, power_q: q, seed };
    Ok(power_from_omega(op, &omega, q, tol, spec))
}

fn power_from_omega<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    omega: &Matrix<T>,
    q: usize,
    tol: T::Real,
    spec: SketchSpec,
) -> RangeBasis<T> {
    let before = op.counters();
    let ell = omega.ncols();
    let mut y = op.apply(omega);
    for _ in 0..q {
        let z = op.apply_adjoint(&y);
        y = op.apply(&z);
    }
    let (qm, est) = basis_from_samples(&y, tol);
    RangeBasis {
        q: qm,
        samples_used: ell,
        passes: 2 * q as u64 + 1,
        matvecs: (2 * q as u64 + 1) * ell as u64,
        est_error: est,
        spec,
        saturated: false,
        work: op.counters().since(&before),
        trace: Vec::new(),
    }
}

/// Subspace iteration: the power scheme with an orthonormalization after
/// every application of `A` and `A^*`.
pub fn subspace_iteration_range<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    ell: usize,
    q: usize,
    seed: u64,
) -> Result<RangeBasis<T>> {
    subspace_iteration_range_with(op, ell, q, seed, default_rank_tol())
}

pub fn subspace_iteration_range_with<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    ell: usize,
    q: usize,
    seed: u64,
    tol: T::Real,
) -> Result<RangeBasis<T>> {
    check_ell(op, ell)?;
    let omega: Matrix<T> = gaussian_matrix(op.ncols(), ell, seed);
    let spec = SketchSpec { kind: SketchKind::Gaussian, ell, power_q: q, seed };
    Ok(subspace_from_omega(op, &omega, q, tol, spec))
}

fn subspace_from_omega<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    omega: &Matrix<T>,
    q: usize,
    tol: T::Real,
    spec: SketchSpec,
) -> RangeBasis<T> {
    let before = op.counters();
    let ell = omega.ncols();
    let (mut qm, mut est) = basis_from_samples(&op.apply(omega), tol);
    for _ in 0..q {
        let qt = orthonormalize_double_gs(&op.apply_adjoint(&qm), tol);
        (qm, est) = basis_from_samples(&op.apply(&qt), tol);
    }
    RangeBasis {
        q: qm,
        samples_used: ell,
        passes: 2 * q as u64 + 1,
        matvecs: (2 * q as u64 + 1) * ell as u64,
        est_error: est,
        spec,
        saturated: false,
        work: op.counters().since(&before),
        trace: Vec::new(),
    }
}

/// Fixed-rank finder driven by a [`SketchSpec`] with an unstructured kind.
/// `power_q > 0` runs subspace iteration.
pub fn range_finder<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, spec: &SketchSpec) -> Result<RangeBasis<T>> {
    check_ell(op, spec.ell)?;
    let omega = test_matrix::<T>(spec.kind, op.ncols(), spec.ell, spec.seed)?;
    let tol = default_rank_tol();
    Ok(if spec.power_q == 0 {
        power_from_omega(op, &omega, 0, tol, *spec)
    } else {
        subspace_from_omega(op, &omega, spec.power_q, tol, *spec)
    })
}

/// Posterior bound `alpha sqrt(2/pi) max_i ‖(I - QQ^*) A ω^(i)‖` from `r`
/// fresh Gaussian probes. It fails to bound `‖(I - QQ^*)A‖` with
/// probability at most `alpha^(-r)`.
pub fn posterior_error_estimate<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    q: &Matrix<T>,
    r: usize,
    alpha: T::Real,
    seed: u64,
) -> Result<T::Real> {
    if r == 0 {
        return Err(Error::InvalidArgument("at least one probe is required".into()));
    }
    if !(alpha > T::Real::one()) {
        return Err(Error::InvalidArgument("alpha must exceed 1".into()));
    }
    if q.nrows() != op.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, operator has {}",
            q.nrows(),
            op.nrows()
        )));
    }
    let omega: Matrix<T> = gaussian_matrix_stream(op.ncols(), r, seed, stream::PROBES);
    let y = op.apply(&omega);
    let res = if q.ncols() == 0 { y } else { &y - &q.matmul(&q.adjoint_matmul(&y)) };
    let worst = res.col_norms().into_iter().fold(T::Real::zero(), Float::max);
    Ok(alpha * sqrt_two_over_pi::<T::Real>() * worst)
}

/// Probe state of the adaptive range finder.
///
/// Holds the growing basis and exactly `r` pending residual probes, each
/// kept orthogonal to the current basis.
pub struct AdaptiveState<'a, T: Scalar, O: LinearOperator<T> + ?Sized> {
    op: &'a O,
    rng: Rng,
    basis: Vec<Vec<T>>,
    probes: VecDeque<Vec<T>>,
    draws: usize,
    cap: usize,
    /// Probes at or below this norm are not added to the basis.
    floor: T::Real,
}

impl<'a, T: Scalar, O: LinearOperator<T> + ?Sized> AdaptiveState<'a, T, O> {
    pub fn new(op: &'a O, r: usize, seed: u64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("at least one probe is required".into()));
        }
        let mut st = Self {
            op,
            rng: rng_for(seed, stream::TEST_MATRIX),
            basis: Vec::new(),
            probes: VecDeque::with_capacity(r),
            draws: 0,
            cap: op.nrows().min(op.ncols()),
            floor: T::Real::zero(),
        };
        let y = st.draw(r);
        let scale = y.col_norms().into_iter().fold(T::Real::zero(), Float::max);
        st.floor = scale * T::Real::epsilon();
        st.probes.extend((0..r).map(|j| y.col(j)));
        Ok(st)
    }

    /// `A [ω_1 ... ω_b]` for `b` fresh Gaussian vectors, drawn one after another.
    fn draw(&mut self, b: usize) -> Matrix<T> {
        let n = self.op.ncols();
        let cols: Vec<Vec<T>> = (0..b)
            .map(|_| (0..n).map(|_| T::sample_gaussian(&mut self.rng)).collect())
            .collect();
        self.draws += b;
        self.op.apply(&from_cols(n, &cols))
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn saturated(&self) -> bool {
        self.basis.len() >= self.cap
    }

    pub fn max_probe_norm(&self) -> T::Real {
        self.probes.iter().map(|y| norm2(y)).fold(T::Real::zero(), Float::max)
    }

    /// `10 sqrt(2/pi) max ‖y^(i)‖`.
    pub fn estimate(&self) -> T::Real {
        T::Real::lit(DEFAULT_ALPHA) * sqrt_two_over_pi::<T::Real>() * self.max_probe_norm()
    }

    pub fn basis(&self) -> Matrix<T> {
        from_cols(self.op.nrows(), &self.basis)
    }

    fn push_basis(&mut self, mut y: Vec<T>) -> Option<usize> {
        project_out(&self.basis, &mut y);
        project_out(&self.basis, &mut y);
        let nrm = norm2(&y);
        if nrm <= self.floor || nrm == T::Real::zero() || self.saturated() {
            return None;
        }
        let inv = nrm.recip();
        y.iter_mut().for_each(|x| *x = x.scale(inv));
        self.basis.push(y);
        Some(self.basis.len() - 1)
    }

    /// One iteration: the oldest probe joins the basis, a fresh probe is
    /// drawn and the pending probes are downdated.
    pub fn step(&mut self) {
        self.step_block(1);
    }

    /// Blocked iteration that moves `b` probes into the basis at once.
    pub fn step_block(&mut self, b: usize) {
        let b = b.clamp(1, self.probes.len());
        let first = self.basis.len();
        for _ in 0..b {
            let y = self.probes.pop_front().expect("probe queue is never empty");
            self.push_basis(y);
        }
        let added: Vec<Vec<T>> = self.basis[first..].to_vec();
        for y in self.probes.iter_mut() {
            project_out(&added, y);
        }
        let fresh = self.draw(b);
        for j in 0..b {
            let mut y = fresh.col(j);
            project_out(&self.basis, &mut y);
            project_out(&self.basis, &mut y);
            self.probes.push_back(y);
        }
    }

    fn record(&self) -> AdaptiveStep<T::Real> {
        AdaptiveStep { ell: self.rank(), max_probe_norm: self.max_probe_norm(), estimate: self.estimate() }
    }
}

/// Adaptive randomized range finder for the fixed-precision problem.
///
/// Grows `Q` one vector at a time until `r` consecutive residual probes
/// have norm at most `eps / (10 sqrt(2/pi))`, so that `‖(I - QQ^*)A‖ <= eps`
/// except with probability at most `min(m, n) 10^(-r)`.
pub fn adaptive_range_finder<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    eps: T::Real,
    r: usize,
    seed: u64,
) -> Result<RangeBasis<T>> {
    adaptive_impl(op, eps, r, 1, seed)
}

/// [`adaptive_range_finder`] moving `block` probes into the basis per step.
pub fn adaptive_range_finder_blocked<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    eps: T::Real,
    r: usize,
    block: usize,
    seed: u64,
) -> Result<RangeBasis<T>> {
    if block == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    adaptive_impl(op, eps, r, block, seed)
}

fn adaptive_impl<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    eps: T::Real,
    r: usize,
    block: usize,
    seed: u64,
) -> Result<RangeBasis<T>> {
    if !(eps > T::Real::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let before = op.counters();
    let threshold = eps / (T::Real::lit(DEFAULT_ALPHA) * sqrt_two_over_pi::<T::Real>());
    let mut st = AdaptiveState::new(op, r, seed)?;
    let mut trace = vec![st.record()];
    while st.max_probe_norm() > threshold && !st.saturated() {
        let prev = (st.rank(), st.draws());
        st.step_block(block);
        trace.push(st.record());
        if st.rank() == prev.0 && st.draws() > prev.1 + 4 * op.nrows().min(op.ncols()) {
            break;
        }
    }
    let q = st.basis();
    Ok(RangeBasis {
        samples_used: st.draws(),
        passes: 1,
        matvecs: st.draws() as u64,
        est_error: Some(st.estimate()),
        spec: SketchSpec { kind: SketchKind::Gaussian, ell: q.ncols(), power_q: 0, seed },
        saturated: st.saturated() && st.max_probe_norm() > threshold,
        work: op.counters().since(&before),
        trace,
        q,
    })
}

/// `Y = A Ω` for a structured `Ω`, computed row by row with the FFT.
/// Returns the samples and the real flops charged.
pub fn structured_samples<T: Scalar>(
    a: &Matrix<T>,
    kind: SketchKind,
    ell: usize,
    seed: u64,
) -> Result<(Matrix<Complex<T::Real>>, u64)>
where
    Complex<T::Real>: Scalar<Real = T::Real>,
{
    let n = a.ncols();
    match kind {
        SketchKind::Srft => {
            let s = SrftOperator::<T::Real>::new(n, ell, seed)?;
            Ok((s.apply(a)?, s.flops(a.nrows())))
        }
        SketchKind::Gsrft => {
            let g = GsrftOperator::<T::Real>::new(n, ell, seed)?;
            Ok((g.apply(a)?, g.flops(a.nrows())))
        }
        other => Err(Error::InvalidArgument(format!("{other} is not a structured sketch"))),
    }
}

/// Explicit `n x ℓ` structured test matrix for the same draw as
/// [`structured_samples`].
pub fn structured_dense<R: RealScalar>(kind: SketchKind, n: usize, ell: usize, seed: u64) -> Result<Matrix<Complex<R>>>
where
    Complex<R>: Scalar<Real = R>,
{
    match kind {
        SketchKind::Srft => Ok(SrftOperator::<R>::new(n, ell, seed)?.dense()),
        SketchKind::Gsrft => Ok(GsrftOperator::<R>::new(n, ell, seed)?.dense()),
        other => Err(Error::InvalidArgument(format!("{other} is not a structured sketch"))),
    }
}

/// Fast randomized range finder with an SRFT or GSRFT test matrix.
/// Real inputs give a complex basis.
pub fn fast_range_finder<T: Scalar>(
    a: &Matrix<T>,
    ell: usize,
    seed: u64,
    kind: SketchKind,
) -> Result<RangeBasis<Complex<T::Real>>>
where
    Complex<T::Real>: Scalar<Real = T::Real>,
{
    let (y, flops) = structured_samples(a, kind, ell, seed)?;
    Ok(structured_basis(y, flops, kind, ell, seed))
}

/// Reference path for [`fast_range_finder`] that multiplies by the
/// explicit test matrix.
pub fn fast_range_finder_dense<T: Scalar>(
    a: &Matrix<T>,
    ell: usize,
    seed: u64,
    kind: SketchKind,
) -> Result<RangeBasis<Complex<T::Real>>>
where
    Complex<T::Real>: Scalar<Real = T::Real>,
{
    let omega = structured_dense::<T::Real>(kind, a.ncols(), ell, seed)?;
    let flops = (a.nrows() * a.ncols() * ell) as u64;
    Ok(structured_basis(a.to_complex().matmul(&omega), flops, kind, ell, seed))
}

fn structured_basis<R: RealScalar>(
    y: Matrix<Complex<R>>,
    flops: u64,
    kind: SketchKind,
    ell: usize,
    seed: u64,
) -> RangeBasis<Complex<R>>
where
    Complex<R>: Scalar<Real = R>,
{
    let (q, est) = basis_from_samples(&y, default_rank_tol());
    RangeBasis {
        q,
        samples_used: ell,
        passes: 1,
        matvecs: y.nrows() as u64,
        est_error: est,
        spec: SketchSpec { kind, ell, power_q: 0, seed },
        saturated: false,
        work: OpCounters { matvecs: 0, adjoint_matvecs: 0, passes: 1, flops },
        trace: Vec::new(),
    }
}

/// Fixed-precision run with a structured sketch: `ℓ = start, 2 start, ...`
/// until the posterior estimate drops to `eps` or `ℓ` reaches `n`.
pub fn fast_range_finder_doubling<T: Scalar>(
    a: &Matrix<T>,
    eps: T::Real,
    start: usize,
    kind: SketchKind,
    r: usize,
    seed: u64,
) -> Result<RangeBasis<Complex<T::Real>>>
where
    Complex<T::Real>: Scalar<Real = T::Real>,
{
    let n = a.ncols();
    let ac = a.to_complex();
    let mut ell = start.max(1).min(n);
    let mut passes = 0;
    loop {
        let mut basis = fast_range_finder(a, ell, seed, kind)?;
        let est = posterior_error_estimate(&ac, &basis.q, r, T::Real::lit(DEFAULT_ALPHA), seed)?;
        passes += 2;
        basis.est_error = Some(est);
        basis.passes = passes;
        if est <= eps || ell == n {
            basis.saturated = est > eps;
            return Ok(basis);
        }
        ell = (2 * ell).min(n);
    }
}
