use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero form: all coefficients vanish")]
    ZeroForm,

    #[error("form is reducible over Q: {0}")]
    Reducible(String),

    #[error("arithmetic range exceeded: {0}")]
    Range(String),

    #[error("internal consistency check failed: {0}")]
    Corruption(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("divisor cap exceeded: tau = {tau} > {cap}")]
    CapExceeded { tau: u64, cap: u64 },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
