//! Randomized low-rank matrix approximation.
//!
//! A two-stage toolkit: a randomized range finder produces an orthonormal
//! basis `Q` with `A ≈ QQ^*A`, and deterministic postprocessing turns `Q`
//! into a partial SVD, eigendecomposition or interpolative decomposition.
//! Around it sit a posterior error estimator, closed-form error bounds,
//! brute-force reference computations, and Matrix Market / binary I/O.

pub mod bounds;
pub mod error;
pub mod factor;
pub mod io;
pub(crate) mod prelude;
pub mod linalg;
pub mod matrix;
pub mod oracle;
pub mod rangefinder;
pub mod rng;
pub mod scalar;
pub mod sketch;

pub use bounds::Norm;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{RealScalar, Scalar};

#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex<f64>;
#[allow(non_camel_case_types)]
pub type c32 = num_complex::Complex<f32>;

pub type Mat = Matrix<f64>;
pub type CMat = Matrix<c64>;
pub type Mat32 = Matrix<f32>;
pub type CMat32 = Matrix<c32>;
