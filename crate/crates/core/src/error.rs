use thiserror::Error;

/// Errors raised across the toolkit. Each variant carries a human-readable
/// message naming the offending value.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range (Hurst index, interval endpoints).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A result was requested outside the hypothesis under which it holds.
    #[error("hypothesis error: {0}")]
    Hypothesis(String),
    /// A function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller-supplied inputs violate the operation's contract.
    #[error("contract error: {0}")]
    Contract(String),
    /// An enumeration or grid exceeds the configured budget.
    #[error("budget error: {0}")]
    Budget(String),
    /// Path generation failed (covariance not positive semi-definite after jitter).
    #[error("generation error: {0}")]
    Generation(String),
    /// A discretization is too coarse for the requested functional.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
