use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("quadrature size {0} outside the supported range 1..={max}", max = crate::basis::MAX_QUAD_NODES)]
    QuadratureSize(usize),

    #[error("quadrature size {found} too small, need at least {required}")]
    QuadratureTooSmall { required: usize, found: usize },

    #[error("non-finite function value at {0:?}")]
    NonFinite(Vec<f64>),

    #[error("truncation margin violated: need N >= {required}, have N = {available}")]
    Margin { required: usize, available: usize },

    #[error("coefficient count {found} does not match C(N+d, d) = {expected}")]
    Length { expected: usize, found: usize },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("input has zero norm")]
    ZeroNorm,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
