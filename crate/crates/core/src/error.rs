use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inconsistent lengths, out-of-range scalars and similar caller mistakes.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Arguments outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation needs exhaustive enumeration that the instance does not allow.
    #[error("capability error: {0}")]
    Capability(String),

    /// A root finder or quadrature failed to meet its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The requested false-alarm target cannot be met.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Reading or writing files.
    #[error("i/o error: {0}")]
    Io(String),

    /// Malformed experiment configuration.
    #[error("config error (line {line}, field `{field}`): {message}")]
    Config {
        line: usize,
        field: String,
        message: String,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn io(e: impl std::fmt::Display) -> Self {
        Error::Io(e.to_string())
    }

    pub(crate) fn config(line: usize, field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            field: field.into(),
            message: msg.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parameter(_) | Error::Domain(_) => 2,
            Error::Numerical(_) | Error::Calibration(_) => 3,
            Error::Capability(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
