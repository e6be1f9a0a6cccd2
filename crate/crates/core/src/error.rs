use std::path::PathBuf;

/// Errors raised by the library and the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate statistic: {0}")]
    DegenerateStatistic(&'static str),

    #[error("conditioning on a zero-probability event ({0})")]
    DegenerateConditioning(&'static str),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("no support point satisfies the defining inequalities of {0}; truncation too coarse")]
    TruncationTooCoarse(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
