use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("corner too wide: {} features cross simultaneously (limit {limit}): {features:?}", features.len())]
    CornerTooWide { features: Vec<usize>, limit: usize },

    #[error("{n} features exceeds the limit of {limit} for {method}; use {suggestion}")]
    TooManyFeatures {
        n: usize,
        limit: usize,
        method: &'static str,
        suggestion: &'static str,
    },

    #[error("quadrature did not converge (residual {residual:e}); best estimate {estimate:?}")]
    QuadratureNotConverged { estimate: Vec<f64>, residual: f64 },

    #[error("non-finite model output: {0}")]
    NonFinite(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad user input (as opposed to a computation
    /// that could not be completed).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::Schema { .. }
                | Error::Io(_)
        )
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
