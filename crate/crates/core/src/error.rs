use thiserror::Error;

/// Errors produced by the calculus, the quadrature engine and the checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown Bernstein function `{name}`; valid names: {valid}")]
    UnknownFunction { name: String, valid: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid Lévy measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("tail truncation cannot be certified below {tol:e} (searched up to U = {reached:e})")]
    TruncationNotCertified { tol: f64, reached: f64 },

    #[error("matrix exponential out of range: |tA|_1 = {0:e}")]
    ExpmOverflow(f64),

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("missing construction data: {0}")]
    MissingConstruction(String),

    #[error("spectrum violation: {0}")]
    Spectrum(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
