//! Crate-wide error type.
//!
//! Every error carries a short machine-greppable code (`E_PARAM`, `E_DOMAIN`,
//! `E_DATA`, `E_GUARD`, `E_OPT`, `E_IO`, `E_PARSE`); the CLI prints errors as
//! `error[CODE]: message` so scripts can match on the code alone.

use thiserror::Error;

/// Errors produced by loss evaluation, fitting, data handling and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range (bad τ, c, k, config field).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A derivative was requested at a point where it does not exist
    /// (for example the check loss at a zero residual).
    #[error("domain error: {0}")]
    Domain(String),

    /// The data violate a structural requirement (dimension mismatch,
    /// non-finite entries, zero-variance column, n < p).
    #[error("data error: {0}")]
    Data(String),

    /// A combinatorial guard refused an oversized exact-oracle instance.
    #[error("instance too large: {0}")]
    Guard(String),

    /// The optimizer encountered a non-finite gradient.
    #[error("optimization error at iteration {iteration}: {message}")]
    Optimization { iteration: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// A value failed to parse (malformed number in a CSV cell, bad flag).
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Machine-greppable code, stable across message wording changes.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "E_PARAM",
            Error::Domain(_) => "E_DOMAIN",
            Error::Data(_) => "E_DATA",
            Error::Guard(_) => "E_GUARD",
            Error::Optimization { .. } => "E_OPT",
            Error::Io(_) => "E_IO",
            Error::Csv(_) | Error::Json(_) | Error::Parse(_) => "E_PARSE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_stable() {
        assert_eq!(Error::InvalidParameter("x".into()).code(), "E_PARAM");
        assert_eq!(Error::Domain("x".into()).code(), "E_DOMAIN");
        assert_eq!(Error::Data("x".into()).code(), "E_DATA");
        assert_eq!(Error::Guard("x".into()).code(), "E_GUARD");
        assert_eq!(
            Error::Optimization {
                iteration: 3,
                message: "x".into()
            }
            .code(),
            "E_OPT"
        );
    }
}
