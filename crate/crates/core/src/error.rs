use thiserror::Error;

/// Errors raised by the solver, the search drivers and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires grid metadata")]
    MissingGrid,

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("degenerate frame: column {column} is linearly dependent on the preceding ones")]
    DegenerateFrame { column: usize },

    #[error("point is not stationary: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotStationary { residual: f64, tol: f64 },

    #[error("search did not converge (status {0})")]
    NotConverged(String),

    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
