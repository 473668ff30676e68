use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model returned a non-finite {what} at point {point:?}")]
    NonFinite { what: &'static str, point: Vec<f64> },

    #[error(
        "model variance is not positive (D = {variance:.3e}); the model is constant \
         or nearly constant and sensitivity ratios are undefined"
    )]
    ConstantModel { variance: f64 },

    #[error("dimension {requested} exceeds the direction-number table ({available} dimensions)")]
    DimensionUnsupported { requested: usize, available: usize },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("operation requires {required:?} input distributions, model has {actual:?}")]
    DistributionMismatch {
        required: &'static str,
        actual: String,
    },

    #[error("quadrature oracle supports dimension <= {max}, model has {requested}")]
    OracleDimension { requested: usize, max: usize },

    #[error(
        "quadrature oracle did not converge for {quantity}: values at successive node \
         counts differ by {delta:.3e} (model may not be smooth enough)"
    )]
    OracleAccuracy { quantity: &'static str, delta: f64 },

    #[error("no analytic reference for {quantity} on function {function}")]
    MissingReference { function: String, quantity: String },

    #[error("malformed direction-number table at line {line}: {message}")]
    DirectionTable { line: usize, message: String },
}

impl Error {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
