use thiserror::Error;

/// Errors raised by samplers, solvers and Monte Carlo pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("degenerate spectrum: eigenvalues {0} and {1} closer than tolerance")]
    DegenerateSpectrum(f64, f64),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("step size violates stability bound: {0}")]
    StepSize(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
