use thiserror::Error;

/// Errors raised by weight construction, transforms and the eigensolver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WirtingerError {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("weight is not bounded away from zero: inf = {inf:e} (floor {floor:e})")]
    NonPositiveWeight { inf: f64, floor: f64 },

    #[error("reversed integration bounds: {lower} > {upper}")]
    ReversedBounds { lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh needs at least 8 nodes, got {0}")]
    MeshTooSmall(usize),

    #[error("eigensolver failed: {0}")]
    Eigensolve(String),

    #[error("first constrained eigenvalue is not positive: {0:e}")]
    NonPositiveEigenvalue(f64),

    #[error("degenerate trial function: {0}")]
    DegenerateFunction(String),

    #[error("quadrature underflow: {0}")]
    Underflow(String),
}

pub type Result<T> = std::result::Result<T, WirtingerError>;
