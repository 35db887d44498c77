//! Random test matrices and their fast application.

pub mod fft;
pub mod gsrft;
pub mod srft;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::householder_qr;
use crate::rng::{rng_for, stream};
use crate::prelude::*;

pub use fft::{dft, dft_naive, FftPlan};
pub use gsrft::{GivensChain, GsrftOperator};
pub use srft::{sample_without_replacement, SrftOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SketchKind {
    #[default]
    Gaussian,
    /// Haar-distributed matrix with orthonormal columns.
    Ortho,
    Srft,
    Gsrft,
}

impl SketchKind {
    pub const ALL: [SketchKind; 4] = [SketchKind::Gaussian, SketchKind::Ortho, SketchKind::Srft, SketchKind::Gsrft];

    pub fn is_structured(self) -> bool {
        matches!(self, SketchKind::Srft | SketchKind::Gsrft)
    }
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SketchKind::Gaussian => "gauss",
            SketchKind::Ortho => "ortho",
            SketchKind::Srft => "srft",
            SketchKind::Gsrft => "gsrft",
        };
        f.write_str(s)
    }
}

impl FromStr for SketchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" => Ok(SketchKind::Gaussian),
            "ortho" => Ok(SketchKind::Ortho),
            "srft" => Ok(SketchKind::Srft),
            "gsrft" => Ok(SketchKind::Gsrft),
            other => Err(Error::InvalidArgument(format!("unknown sketch kind `{other}`"))),
        }
    }
}

/// Configuration of one randomized sketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchSpec {
    pub kind: SketchKind,
    pub ell: usize,
    pub power_q: usize,
    pub seed: u64,
}

impl SketchSpec {
    pub fn gaussian(ell: usize, seed: u64) -> Self {
        Self { kind: SketchKind::Gaussian, ell, power_q: 0, seed }
    }

    /// `ℓ = k + p`.
    pub fn fixed_rank(kind: SketchKind, k: usize, p: usize, q: usize, seed: u64) -> Self {
        Self { kind, ell: k + p, power_q: q, seed }
    }
}

/// `n x ell` matrix of independent standard normal entries.
///
/// The entries are a pure function of `(n, ell, seed)`.
pub fn gaussian_matrix<T: Scalar>(n: usize, ell: usize, seed: u64) -> Matrix<T> {
    gaussian_matrix_stream(n, ell, seed, stream::TEST_MATRIX)
}

pub fn gaussian_matrix_stream<T: Scalar>(n: usize, ell: usize, seed: u64, stream_id: u64) -> Matrix<T> {
    let mut rng = rng_for(seed, stream_id);
    Matrix::from_fn(n, ell, |_, _| T::sample_gaussian(&mut rng))
}

/// Haar-distributed `n x ell` matrix with orthonormal columns (`ell <= n`).
pub fn haar_orthonormal<T: Scalar>(n: usize, ell: usize, seed: u64) -> Matrix<T> {
    assert!(ell <= n, "Haar matrix needs ell <= n");
    let g: Matrix<T> = gaussian_matrix_stream(n, ell, seed, stream::HAAR);
    householder_qr(&g).q
}

/// Dense test matrix for the unstructured kinds. Structured kinds return
/// their explicit complex form through the operator types instead.
pub fn dense_test_matrix<T: Scalar>(kind: SketchKind, n: usize, ell: usize, seed: u64) -> Result<Matrix<T>> {
    match kind {
        SketchKind::Gaussian => Ok(gaussian_matrix(n, ell, seed)),
        SketchKind::Ortho => {
            if ell > n {
                return Err(Error::SampleCountExceedsDimension { ell, n });
            }
            Ok(haar_orthonormal(n, ell, seed))
        }
        _ => Err(Error::InvalidArgument(format!("{kind} has no dense real form"))),
    }
}
