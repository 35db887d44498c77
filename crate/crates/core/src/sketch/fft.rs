//! Unitary DFT of arbitrary length.
//!
//! Powers of two use an iterative radix-2 transform; other lengths go
//! through Bluestein's chirp-z identity on a power-of-two grid. Each plan
//! also reports a deterministic real-flop count for one transform.

use num_complex::Complex;

use crate::prelude::*;

/// Real flops charged for one complex multiply and one complex add.
pub const CMUL_FLOPS: u64 = 6;
pub const CADD_FLOPS: u64 = 2;

#[derive(Clone, Debug)]
struct Radix2<R> {
    n: usize,
    bitrev: Vec<usize>,
    /// `exp(-2 pi i k / n)` for `k < n/2`.
    twiddles: Vec<Complex<R>>,
}

impl<R: RealScalar> Radix2<R> {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2).map(|k| unit_root::<R>(k as u64, n as u64, -1.0)).collect();
        Self { n, bitrev, twiddles }
    }

    /// Unnormalized forward (`sign = -1`) or inverse (`sign = +1`) transform.
    fn run(&self, x: &mut [Complex<R>], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                x.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = x[start + k];
                    let b = x[start + k + half] * w;
                    x[start + k] = a + b;
                    x[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn flops(&self) -> u64 {
        let n = self.n as u64;
        if n < 2 {
            return 0;
        }
        (n / 2) * u64::from(self.n.trailing_zeros()) * (CMUL_FLOPS + 2 * CADD_FLOPS)
    }
}

#[derive(Clone, Debug)]
enum Kind<R> {
    Radix2(Radix2<R>),
    Bluestein {
        inner: Radix2<R>,
        /// `exp(-i pi k^2 / n)`, `k < n`.
        chirp: Vec<Complex<R>>,
        /// Forward transform of the conjugate chirp on the padded grid.
        kernel: Vec<Complex<R>>,
    },
}

/// Precomputed unitary DFT of length `n`.
#[derive(Clone, Debug)]
pub struct FftPlan<R> {
    n: usize,
    kind: Kind<R>,
    norm: R,
}

impl<R: RealScalar> FftPlan<R> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "FFT length must be positive");
        let norm = R::from_count(n).sqrt().recip();
        if n.is_power_of_two() {
            return Self { n, kind: Kind::Radix2(Radix2::new(n)), norm };
        }
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        let two_n = 2 * n as u64;
        let chirp: Vec<Complex<R>> = (0..n as u64)
            .map(|k| unit_root::<R>((k * k) % two_n, two_n, -1.0))
            .collect();
        let mut kernel = vec![Complex::new(R::zero(), R::zero()); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.run(&mut kernel, false);
        Self { n, kind: Kind::Bluestein { inner, chirp, kernel }, norm }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unitary forward DFT:
    /// `X_q = n^{-1/2} sum_p x_p exp(-2 pi i p q / n)`.
    pub fn forward(&self, x: &mut [Complex<R>]) {
        assert_eq!(x.len(), self.n);
        match &self.kind {
            Kind::Radix2(r) => r.run(x, false),
            Kind::Bluestein { inner, chirp, kernel } => {
                let m = inner.n;
                let mut buf = vec![Complex::new(R::zero(), R::zero()); m];
                for k in 0..self.n {
                    buf[k] = x[k] * chirp[k];
                }
                inner.run(&mut buf, false);
                for (b, k) in buf.iter_mut().zip(kernel) {
                    *b = *b * *k;
                }
                inner.run(&mut buf, true);
                let inv_m = R::from_count(m).recip();
                for k in 0..self.n {
                    x[k] = buf[k] * chirp[k] * inv_m;
                }
            }
        }
        for v in x.iter_mut() {
            *v = *v * self.norm;
        }
    }

    /// Real flops charged for one call to [`FftPlan::forward`].
    pub fn flops(&self) -> u64 {
        let n = self.n as u64;
        let scale = 2 * n;
        match &self.kind {
            Kind::Radix2(r) => r.flops() + scale,
            Kind::Bluestein { inner, .. } => {
                let m = inner.n as u64;
                // chirp in, two transforms, pointwise kernel, chirp and 1/m out
                n * CMUL_FLOPS + 2 * inner.flops() + m * CMUL_FLOPS + n * (CMUL_FLOPS + 2) + scale
            }
        }
    }
}

/// `exp(sign * 2 pi i num / den)`.
fn unit_root<R: RealScalar>(num: u64, den: u64, sign: f64) -> Complex<R> {
    let ang = sign * std::f64::consts::TAU * (num as f64) / (den as f64);
    Complex::new(R::lit(ang.cos()), R::lit(ang.sin()))
}

/// Unitary DFT of `v`.
pub fn dft<R: RealScalar>(v: &[Complex<R>]) -> Vec<Complex<R>> {
    let mut out = v.to_vec();
    if !out.is_empty() {
        FftPlan::new(v.len()).forward(&mut out);
    }
    out
}

/// Reference `O(n^2)` unitary DFT from the entry formula.
pub fn dft_naive<R: RealScalar>(v: &[Complex<R>]) -> Vec<Complex<R>> {
    let n = v.len();
    let norm = R::from_count(n).sqrt().recip();
    (0..n)
        .map(|q| {
            let mut s = Complex::new(R::zero(), R::zero());
            for (p, &x) in v.iter().enumerate() {
                s = s + x * unit_root::<R>(((p * q) % n) as u64, n as u64, -1.0);
            }
            s * norm
        })
        .collect()
}
