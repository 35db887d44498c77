pub(crate) use num_traits::{Float, One, ToPrimitive, Zero};

pub(crate) use crate::matrix::Matrix;
pub(crate) use crate::scalar::{RealScalar, Scalar};
