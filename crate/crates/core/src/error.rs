use thiserror::Error;

#[derive(Debug, Error)]
pub enum BergmanError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (supported: 1..={max})", max = crate::geometry::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("point with norm {norm} is not inside the open unit ball")]
    OutsideBall { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite sample value at node {index}")]
    NonFiniteSample { index: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("function family limit exceeded: {0}")]
    FamilyLimit(String),

    #[error("malformed function description: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BergmanError>;

pub(crate) fn invalid(msg: impl Into<String>) -> BergmanError {
    BergmanError::InvalidParameter(msg.into())
}
