use thiserror::Error;

/// Errors raised by state construction, operator algebra and the model builders.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("cannot normalize a zero vector")]
    ZeroNorm,

    #[error("empty tensor product")]
    EmptyTensor,

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("operator is not unitary: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A computed result failed one of the checks the model promises.
    #[error("check `{check}` failed: {detail}")]
    CheckFailed { check: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
