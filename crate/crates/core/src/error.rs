use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or point is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A dataset is missing a (workload, point) cell.
    #[error("incomplete table: missing workload `{workload}` at `{point}`")]
    Incomplete { workload: String, point: String },

    #[error("duplicate entry: workload `{workload}` at `{point}`")]
    Duplicate { workload: String, point: String },

    #[error("invalid value: {0}")]
    Value(String),

    /// Surrogate fitting rejected its training data.
    #[error("fit error: {0}")]
    Fit(String),

    /// A linear system could not be factorized or solved.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Optimizer suggest/observe calls out of order.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("budget error: {0}")]
    Budget(String),

    /// Internal consistency check failed; signals a bug rather than bad input.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("objective failed at step {step} ({point}): {message}")]
    Objective {
        step: usize,
        point: String,
        message: String,
    },

    /// An experiment cell failed; `cell` names its coordinates.
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by the caller's input rather than an internal failure.
    pub fn is_user_error(&self) -> bool {
        if let Error::Cell { source, .. } = self {
            return source.is_user_error();
        }
        !matches!(
            self,
            Error::Numeric(_) | Error::Integrity(_) | Error::Protocol(_)
        )
    }
}
