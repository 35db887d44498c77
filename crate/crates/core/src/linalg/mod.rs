//! Dense kernels: QR, pivoted QR, SVD, Hermitian eigensolver, Cholesky,
//! least squares, and the operator abstraction.

pub mod cholesky;
pub mod eig;
pub(crate) mod householder;
pub mod lstsq;
pub mod operator;
pub mod pivoted_qr;
pub mod qr;
pub mod svd;

pub use cholesky::{cholesky, Cholesky};
pub use eig::{small_eig_hermitian, HermitianEig};
pub use lstsq::least_squares;
pub use operator::{
    adjoint_mismatch, dense_operator, spectral_norm_estimate, Counted, DenseOperator, FnOperator,
    LinearOperator, OpCounters, Scaled,
};
pub use pivoted_qr::{pivoted_qr, pivoted_qr_with, PivotOptions, PivotedQrFactors};
pub use qr::{
    extend_basis, householder_qr, householder_qr_with, orthonormalize_double_gs, solve_lower,
    default_rank_tol, solve_upper, QrFactors, QrMode, DEFAULT_RANK_TOL,
};
pub use svd::{singular_values, small_svd, spectral_norm, SmallSvd};
