use thiserror::Error;

#[derive(Debug, Error)]
pub enum QslError {
    #[error("invalid dimension {0}: need N >= 2")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("target angle undefined for a zero-norm Bloch vector")]
    UndefinedAngle,

    #[error("degenerate spectrum: E_max equals E_min")]
    DegenerateSpectrum,

    #[error("inconsistent energy statistics: mean {mean} outside [{min}, {max}]")]
    InconsistentStats { mean: f64, min: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failure at t = {t}: {reason}; try a smaller step")]
    IntegrationFailure { t: f64, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl QslError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            QslError::IntegrationFailure { .. } => 3,
            QslError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, QslError>;
