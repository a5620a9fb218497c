use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (only n = 1 and n = 2 are modeled)")]
    UnsupportedDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid is not symmetric about t = 0")]
    AsymmetricGrid,

    #[error("grid does not cover {0}")]
    Coverage(String),

    #[error("geometry incompatible with {kind}: {reason}")]
    Geometry { kind: String, reason: String },

    #[error("atom validation failed: {0}")]
    NotAnAtom(String),

    #[error("molecule certification failed: {0}")]
    NotAMolecule(String),

    #[error("decomposition residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("no decomposition strategy applies: {0}")]
    NoStrategy(String),

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("kernel {0} requires n = 1")]
    KernelDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
