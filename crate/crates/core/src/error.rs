use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} needs {requested} qubits/variables, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("gave up after {attempts} attempts: {what}")]
    RetryExhausted { what: String, attempts: usize },

    #[error("degenerate spectrum: f_min == f_max == {0}")]
    DegenerateSpectrum(f64),

    /// Zero overlap with the optimum; the time-to-solution is unbounded.
    #[error("infinite time-to-solution (overlap is zero)")]
    InfiniteTts,

    #[error("executor failed at depth {depth}: {source}")]
    Executor {
        depth: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
