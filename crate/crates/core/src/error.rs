use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Grouping overlaps or references eigentriples beyond the effective rank.
    #[error("grouping error: {message}")]
    Grouping {
        message: String,
        /// Offending 1-based eigentriple indices.
        indices: Vec<usize>,
    },

    #[error(
        "eigen-solver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})"
    )]
    Numerical { sweeps: usize, off_diagonal: f64 },

    /// Malformed microfile input; `line` is 1-based and counts the header.
    #[error("ingestion error at line {line}: {message}")]
    Ingestion { line: usize, message: String },

    #[error("group definition error: {0}")]
    Definition(String),

    /// A bucket could not be grown under the selected donor policy.
    #[error("synthesis error: {0}")]
    Synthesis(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn grouping(msg: impl Into<String>, indices: Vec<usize>) -> Self {
        Error::Grouping {
            message: msg.into(),
            indices,
        }
    }
}
