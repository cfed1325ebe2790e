use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("quadrature tolerance not met: {0}")]
    Quadrature(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("projection rejected: {0}")]
    Rejected(String),
    #[error("unknown mode: {0}")]
    UnknownMode(String),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("dt underflow at t = {t}: dt_min = {dt_min} reached while the error test fails")]
    DtUnderflow { t: f64, dt_min: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error for key `{key}`: {msg}")]
    Validation { key: String, msg: String },
    #[error("singular evaluation: {0}")]
    SingularEvaluation(String),
    #[error("no root in bracket: {0}")]
    NoRoot(String),
    #[error("window too short: {0}")]
    WindowTooShort(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
