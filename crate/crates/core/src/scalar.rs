//! Scalar field abstraction.
//!
//! Every kernel in this crate is written once against [`Scalar`] and
//! instantiated for real (`f32`, `f64`) and complex (`Complex<f32>`,
//! `Complex<f64>`) arithmetic. [`RealScalar`] is the real subfield used for
//! norms, singular values, tolerances and eigenvalues of Hermitian matrices.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A real or complex field element.
pub trait Scalar:
    'static
    + Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + NumAssign
    + Neg<Output = Self>
    + Sum
{
    /// The underlying real type.
    type Real: RealScalar;

    /// `true` for complex instantiations.
    const IS_COMPLEX: bool;

    fn from_real(re: Self::Real) -> Self;

    /// Builds a value from real and imaginary parts. Real fields return
    /// `None` when `im` is nonzero.
    fn from_parts(re: Self::Real, im: Self::Real) -> Option<Self>;

    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;
    fn conj(self) -> Self;

    /// |z|
    fn modulus(self) -> Self::Real;

    /// |z|², without a square root.
    fn modulus_sqr(self) -> Self::Real;

    fn scale(self, factor: Self::Real) -> Self;

    fn to_complex(self) -> Complex<Self::Real>;

    fn is_finite_value(self) -> bool;

    /// Unit-modulus phase `z / |z|`, with `phase(0) = 1`.
    fn phase(self) -> Self {
        let r = self.modulus();
        if r == Self::Real::zero() {
            Self::one()
        } else {
            self.scale(r.recip())
        }
    }

    /// Standard Gaussian draw: N(0, 1) for real fields, and
    /// (N(0, 1) + i N(0, 1)) / sqrt(2) for complex fields, so that
    /// E|z|² = 1 in both cases.
    fn sample_gaussian<G: Rng + ?Sized>(rng: &mut G) -> Self;

    /// Sample from the uniform distribution on the unit circle (complex) or
    /// on {-1, +1} (real).
    fn sample_unimodular<G: Rng + ?Sized>(rng: &mut G) -> Self;
}

/// Real subfield: ordered, with the usual transcendental functions.
pub trait RealScalar:
    Scalar<Real = Self>
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + PartialOrd
    + Display
    + LowerExp
    + Default
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in the real field")
    }

    /// Widens to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in the real field")
    }
}

pub(crate) use num_traits::Zero;

macro_rules! impl_real {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;

            #[inline]
            fn from_real(re: $t) -> Self {
                re
            }
            #[inline]
            fn from_parts(re: $t, im: $t) -> Option<Self> {
                if im == 0.0 {
                    Some(re)
                } else {
                    None
                }
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn im(self) -> $t {
                0.0
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn modulus_sqr(self) -> $t {
                self * self
            }
            #[inline]
            fn scale(self, factor: $t) -> Self {
                self * factor
            }
            #[inline]
            fn to_complex(self) -> Complex<$t> {
                Complex::new(self, 0.0)
            }
            #[inline]
            fn is_finite_value(self) -> bool {
                <$t>::is_finite(self)
            }
            fn sample_gaussian<G: Rng + ?Sized>(rng: &mut G) -> Self {
                let g: f64 = StandardNormal.sample(rng);
                g as $t
            }
            fn sample_unimodular<G: Rng + ?Sized>(rng: &mut G) -> Self {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }

        impl RealScalar for $t {}
    };
}

impl_real!(f32);
impl_real!(f64);

macro_rules! impl_complex {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            type Real = $t;
            const IS_COMPLEX: bool = true;

            #[inline]
            fn from_real(re: $t) -> Self {
                Complex::new(re, 0.0)
            }
            #[inline]
            fn from_parts(re: $t, im: $t) -> Option<Self> {
                Some(Complex::new(re, im))
            }
            #[inline]
            fn re(self) -> $t {
                self.re
            }
            #[inline]
            fn im(self) -> $t {
                self.im
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::conj(&self)
            }
            #[inline]
            fn modulus(self) -> $t {
                self.re.hypot(self.im)
            }
            #[inline]
            fn modulus_sqr(self) -> $t {
                self.re * self.re + self.im * self.im
            }
            #[inline]
            fn scale(self, factor: $t) -> Self {
                Complex::new(self.re * factor, self.im * factor)
            }
            #[inline]
            fn to_complex(self) -> Complex<$t> {
                self
            }
            #[inline]
            fn is_finite_value(self) -> bool {
                self.re.is_finite() && self.im.is_finite()
            }
            fn sample_gaussian<G: Rng + ?Sized>(rng: &mut G) -> Self {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex::new((a * s) as $t, (b * s) as $t)
            }
            fn sample_unimodular<G: Rng + ?Sized>(rng: &mut G) -> Self {
                let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                Complex::new(theta.cos() as $t, theta.sin() as $t)
            }
        }
    };
}

impl_complex!(f32);
impl_complex!(f64);
