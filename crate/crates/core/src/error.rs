//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix failed the unitarity check at construction.
    #[error("matrix is not unitary: max |U^H U - I| = {residual:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    /// A dimension was zero, exceeded [`crate::MAX_DIM`], or two operands disagreed.
    #[error("bad dimension: {0}")]
    Dimension(String),

    /// A parameter was outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The averaging window of a hypothesis test was empty or too long for the spectrum.
    #[error("invalid averaging window: {0}")]
    Window(String),

    /// LAPACK failed to converge or rejected its input.
    #[error("eigensolver failure: {0}")]
    Eigen(String),

    /// A matrix or configuration file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
