use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("partial result: found {found} of {requested} eigenpairs")]
    PartialResult { found: usize, requested: usize },
    #[error("no sign change of the matching function in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("line search failure: residual did not decrease after {halvings} halvings")]
    LineSearch { halvings: usize },
    #[error("singular jacobian: {0}")]
    Singular(String),
    #[error("insufficient fit window: {shells} shells (need at least {needed})")]
    InsufficientWindow { shells: usize, needed: usize },
    #[error("axis undetermined: first moment and sup location are degenerate")]
    AxisUndetermined,
    #[error("config error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },
    #[error("config error in key `{key}`: {msg}")]
    ConfigKey { key: String, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
