use thiserror::Error;

/// Errors raised by the kernels, sketches and factorizations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not PSD: pivot {pivot:.3e} at index {index} below tolerance {tol:.3e}")]
    NotPsd { index: usize, pivot: f64, tol: f64 },

    #[error("kernel failure: {0}")]
    KernelFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample count exceeds dimension: ell = {ell} > n = {n}")]
    SampleCountExceedsDimension { ell: usize, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("ID refinement did not settle within {cap} swaps")]
    RefinementCap { cap: usize },

    #[error("dimension cap exceeded: {0}; use the two-pass path instead")]
    DimensionCap(String),

    #[error("operator is not Hermitian: relative mismatch {0:.3e}")]
    NotHermitian(f64),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("stream error in block {block}: {msg}")]
    Stream { block: usize, msg: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical nature (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPsd { .. }
                | Error::KernelFailure(_)
                | Error::NotHermitian(_)
                | Error::RefinementCap { .. }
                | Error::RankDeficient(_)
        )
    }
}
