use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("slot {slot} out of range for rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slot {slot} already has the requested variance")]
    VarianceMismatch { slot: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric is not positive definite / invertible")]
    SingularMetric,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {coords:?} is too close to the chart boundary for the stencil (margin {margin})")]
    StencilViolation { coords: Vec<f64>, margin: f64 },
    #[error("probe undefined at critical points (|grad f| = {grad_norm:e})")]
    CriticalPoint { grad_norm: f64 },
    #[error("warping function is non-positive at r = {r}")]
    NonPositiveWarp { r: f64 },
    #[error("singular start phi0 = 0 requires dphi0 = 1 and lambda = n - 2 for smooth closure (got dphi0 = {dphi0}, lambda = {lambda}, n = {n})")]
    SingularStart { dphi0: f64, lambda: f64, n: usize },
    #[error("integration failed near r = {r}: {reason}")]
    IntegrationFailure { r: f64, reason: String },
    #[error("unknown model '{0}'")]
    UnknownModel(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
