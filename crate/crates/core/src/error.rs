use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("undamped resonance: H(omega) has a pole at omega = {omega}")]
    Pole { omega: f64 },

    #[error("divergent moment: {0}")]
    Divergent(&'static str),

    #[error("internal consistency check failed: {what} (residue {residue:e})")]
    Consistency { what: &'static str, residue: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Validation { line: Option<u64>, message: String },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no finite values to search")]
    EmptyResult,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Validation {
            line,
            message: message.into(),
        }
    }
}
