use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{rng_for, stream};
use crate::prelude::*;
use crate::sketch::fft::{FftPlan, CMUL_FLOPS};
use crate::sketch::srft::{check_ell, sample_without_replacement};

/// One chain `Θ = Π G(1,2; θ_1) G(2,3; θ_2) ... G(n-1,n; θ_{n-1})`.
///
/// For a row vector, `(a Π)_j = a_{perm[j]}`, and `G(i,i+1; θ)` has
/// `G_ii = G_{i+1,i+1} = cos θ`, `G_{i,i+1} = sin θ`, `G_{i+1,i} = -sin θ`.
#[derive(Clone, Debug)]
pub struct GivensChain<R> {
    pub perm: Vec<usize>,
    pub theta: Vec<R>,
}

impl<R: RealScalar> GivensChain<R> {
    fn draw<G: rand::Rng + ?Sized>(n: usize, rng: &mut G) -> Self {
        let perm = sample_without_replacement(n, n, rng);
        let theta = (0..n.saturating_sub(1))
            .map(|_| R::lit(rng.random::<f64>() * std::f64::consts::TAU))
            .collect();
        Self { perm, theta }
    }

    /// Identity permutation and zero angles.
    pub fn trivial(n: usize) -> Self {
        Self { perm: (0..n).collect(), theta: vec![R::zero(); n.saturating_sub(1)] }
    }

    /// `b <- b Θ` for a row vector `b`.
    pub fn apply_row(&self, b: &mut Vec<Complex<R>>) {
        let permuted: Vec<Complex<R>> = self.perm.iter().map(|&p| b[p]).collect();
        *b = permuted;
        for (i, &t) in self.theta.iter().enumerate() {
            let (s, c) = t.sin_cos();
            let (x, y) = (b[i], b[i + 1]);
            b[i] = x * c - y * s;
            b[i + 1] = x * s + y * c;
        }
    }

    /// Dense `n x n` matrix of the chain.
    pub fn dense(&self) -> Matrix<Complex<R>>
    where
        Complex<R>: Scalar<Real = R>,
    {
        let n = self.perm.len();
        let one = Complex::new(R::one(), R::zero());
        let mut t = Matrix::from_fn(n, n, |p, j| if self.perm[j] == p { one } else { Complex::new(R::zero(), R::zero()) });
        for (i, &th) in self.theta.iter().enumerate() {
            let (s, c) = th.sin_cos();
            let mut g = Matrix::<Complex<R>>::identity(n);
            g[(i, i)] = Complex::new(c, R::zero());
            g[(i, i + 1)] = Complex::new(s, R::zero());
            g[(i + 1, i)] = Complex::new(-s, R::zero());
            g[(i + 1, i + 1)] = Complex::new(c, R::zero());
            t = t.matmul(&g);
        }
        t
    }

    fn flops(&self) -> u64 {
        // four real-by-complex products and two complex adds per rotation
        self.theta.len() as u64 * (4 * 2 + 2 * 2)
    }
}

/// Givens-augmented SRFT `Ω = sqrt(n/ℓ) D'' Θ' D' Θ D F R`.
///
/// Fields are public so that tests can neutralize the rotations.
#[derive(Clone, Debug)]
pub struct GsrftOperator<R: RealScalar> {
    pub n: usize,
    pub ell: usize,
    pub d: Vec<Complex<R>>,
    pub d1: Vec<Complex<R>>,
    pub d2: Vec<Complex<R>>,
    pub theta: GivensChain<R>,
    pub theta1: GivensChain<R>,
    pub picks: Vec<usize>,
    pub scale: R,
    plan: FftPlan<R>,
}

impl<R: RealScalar> GsrftOperator<R>
where
    Complex<R>: Scalar<Real = R>,
{
    pub fn new(n: usize, ell: usize, seed: u64) -> Result<Self> {
        check_ell(n, ell)?;
        let mut rng = rng_for(seed, stream::GSRFT);
        let unimod = |r: &mut crate::rng::Rng| -> Vec<Complex<R>> {
            (0..n).map(|_| Complex::<R>::sample_unimodular(r)).collect()
        };
        let d = unimod(&mut rng);
        let d1 = unimod(&mut rng);
        let d2 = unimod(&mut rng);
        let theta = GivensChain::draw(n, &mut rng);
        let theta1 = GivensChain::draw(n, &mut rng);
        let picks = sample_without_replacement(n, ell, &mut rng);
        let scale = (R::from_count(n) / R::from_count(ell)).sqrt();
        Ok(Self { n, ell, d, d1, d2, theta, theta1, picks, scale, plan: FftPlan::new(n) })
    }

    pub fn apply_row(&self, a: &[Complex<R>]) -> Vec<Complex<R>> {
        let mut w: Vec<Complex<R>> = a.iter().zip(&self.d2).map(|(&x, &d)| x * d).collect();
        self.theta1.apply_row(&mut w);
        w.iter_mut().zip(&self.d1).for_each(|(x, &d)| *x = *x * d);
        self.theta.apply_row(&mut w);
        w.iter_mut().zip(&self.d).for_each(|(x, &d)| *x = *x * d);
        self.plan.forward(&mut w);
        self.picks.iter().map(|&p| w[p].scale(self.scale)).collect()
    }

    pub fn apply<T: Scalar<Real = R>>(&self, a: &Matrix<T>) -> Result<Matrix<Complex<R>>> {
        if a.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "GSRFT of width {} applied to {} columns",
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
        Matrix::from_vec(a.nrows(), self.ell, rows.into_iter().flatten().collect())
    }

    pub fn flops_per_row(&self) -> u64 {
        3 * self.n as u64 * CMUL_FLOPS
            + self.theta.flops()
            + self.theta1.flops()
            + self.plan.flops()
            + 2 * self.ell as u64
    }

    pub fn flops(&self, m: usize) -> u64 {
        m as u64 * self.flops_per_row()
    }

    /// Explicit `n x ℓ` matrix assembled from the factors.
    pub fn dense(&self) -> Matrix<Complex<R>> {
        let n = self.n;
        let diag = |d: &[Complex<R>]| Matrix::from_diag(d);
        let fnorm = R::from_count(n).sqrt().recip();
        let fr = Matrix::from_fn(n, self.ell, |p, j| {
            let q = self.picks[j];
            let ang = -std::f64::consts::TAU * (((p * q) % n) as f64) / n as f64;
            Complex::new(R::lit(ang.cos()), R::lit(ang.sin())).scale(fnorm)
        });
        diag(&self.d2)
            .matmul(&self.theta1.dense())
            .matmul(&diag(&self.d1))
            .matmul(&self.theta.dense())
            .matmul(&diag(&self.d))
            .matmul(&fr)
            .scale_real(self.scale)
    }
}
