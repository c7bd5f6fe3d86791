use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QkdError {
    /// A numeric parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// An operation was invoked on an input its contract excludes.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("scenario is not enumerable: {0}")]
    NotEnumerable(String),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, QkdError>;

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(QkdError::Parameter(format!("{name} must lie in [0, 1], got {p}")))
    }
}
