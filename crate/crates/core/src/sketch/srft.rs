use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{rng_for, stream};
use crate::prelude::*;
use crate::sketch::fft::{FftPlan, CMUL_FLOPS};

/// Subsampled random Fourier transform `Ω = sqrt(n/ℓ) D F R` (`n x ℓ`).
///
/// `D` is diagonal with entries uniform on the unit circle, `F` is the
/// unitary DFT and `R` keeps the columns listed in `picks`.
#[derive(Clone, Debug)]
pub struct SrftOperator<R: RealScalar> {
    pub n: usize,
    pub ell: usize,
    pub d: Vec<Complex<R>>,
    /// Zero-based column indices, distinct, in draw order.
    pub picks: Vec<usize>,
    pub scale: R,
    plan: FftPlan<R>,
}

/// `ℓ` distinct indices from `0..n` by a partial Fisher-Yates shuffle.
pub fn sample_without_replacement<G: rand::Rng + ?Sized>(n: usize, ell: usize, rng: &mut G) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for j in 0..ell {
        let r = rng.random_range(j..n);
        idx.swap(j, r);
    }
    idx.truncate(ell);
    idx
}

pub(crate) fn check_ell(n: usize, ell: usize) -> Result<()> {
    if ell > n {
        return Err(Error::SampleCountExceedsDimension { ell, n });
    }
    if ell == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    Ok(())
}

impl<R: RealScalar> SrftOperator<R>
where
    Complex<R>: Scalar<Real = R>,
{
    pub fn new(n: usize, ell: usize, seed: u64) -> Result<Self> {
        check_ell(n, ell)?;
        let mut rd = rng_for(seed, stream::SRFT_DIAG);
        let d = (0..n).map(|_| Complex::<R>::sample_unimodular(&mut rd)).collect();
        let mut rp = rng_for(seed, stream::SRFT_PICKS);
        let picks = sample_without_replacement(n, ell, &mut rp);
        let scale = (R::from_count(n) / R::from_count(ell)).sqrt();
        Ok(Self { n, ell, d, picks, scale, plan: FftPlan::new(n) })
    }

    /// `a Ω` for one row `a`.
    pub fn apply_row(&self, a: &[Complex<R>]) -> Vec<Complex<R>> {
        let mut w: Vec<Complex<R>> = a.iter().zip(&self.d).map(|(&x, &d)| x * d).collect();
        self.plan.forward(&mut w);
        self.picks.iter().map(|&p| w[p].scale(self.scale)).collect()
    }

    /// `Y = A Ω`, one FFT per row of `A`. Real inputs are promoted.
    pub fn apply<T: Scalar<Real = R>>(&self, a: &Matrix<T>) -> Result<Matrix<Complex<R>>> {
        if a.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "SRFT of width {} applied to {} columns",
                self.n,
                a.ncols()
            )));
        }
        let rows: Vec<Vec<Complex<R>>> = (0..a.nrows())
            .into_par_iter()
            .map(|i| {
                let row: Vec<Complex<R>> = a.row(i).iter().map(|x| x.to_complex()).collect();
                self.apply_row(&row)
            })
            .collect();
        Ok(Matrix::from_vec(a.nrows(), self.ell, rows.into_iter().flatten().collect())?)
    }

    /// Real flops charged for transforming one row.
    pub fn flops_per_row(&self) -> u64 {
        self.n as u64 * CMUL_FLOPS + self.plan.flops() + 2 * self.ell as u64
    }

    /// Real flops charged for `apply` on an `m`-row input.
    pub fn flops(&self, m: usize) -> u64 {
        m as u64 * self.flops_per_row()
    }

    /// Explicit `n x ℓ` matrix built entry by entry from the DFT formula.
    pub fn dense(&self) -> Matrix<Complex<R>> {
        let n = self.n;
        let fnorm = R::from_count(n).sqrt().recip();
        Matrix::from_fn(n, self.ell, |p, j| {
            let q = self.picks[j];
            let ang = -std::f64::consts::TAU * (((p * q) % n) as f64) / n as f64;
            let f = Complex::new(R::lit(ang.cos()), R::lit(ang.sin())).scale(fnorm);
            (self.d[p] * f).scale(self.scale)
        })
    }
}
