use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the moment-model toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("moment order {order} exceeds the supported maximum of {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("moment order {order} is below the minimum of {min} for this operation")]
    OrderTooSmall { order: usize, min: usize },

    #[error("basis index {index} is outside 1..={order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("vertical coordinate {0} lies outside [0, 1]")]
    ZetaOutOfRange(f64),

    #[error("water height must be positive, got h = {0}")]
    NonPositiveHeight(f64),

    #[error("state has {got} components but the model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular matrix encountered in {0}")]
    Singular(&'static str),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reference field has zero L1 norm")]
    ZeroNormReference,

    #[error("fields have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("solver failed at t = {time:.6e} (step {step}, cell {cell}): {reason}; state = {state:?}")]
    SolverFailure {
        time: f64,
        step: usize,
        cell: usize,
        reason: String,
        state: Vec<f64>,
    },

    #[error("{path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Config {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
