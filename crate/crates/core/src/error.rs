use thiserror::Error;

/// Errors produced by the rollout pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A customer whose maximum achievable utility is not positive; the
    /// normalized utility ratio is undefined for them.
    #[error("degenerate customer: maximum achievable utility is not positive")]
    DegenerateCustomer,

    /// An exposure window with no recorded arrivals cannot be normalized.
    #[error("empty window: no arrivals recorded")]
    EmptyWindow,

    /// A run whose overall exposure change is zero; path-relative metrics
    /// are undefined.
    #[error("degenerate run: {0}")]
    DegenerateRun(String),

    #[error("rollout plan error: {0}")]
    Plan(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    SizeLimit(String),

    #[error("load error: {0}")]
    Load(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn load(msg: impl Into<String>) -> Self {
        Error::Load(msg.into())
    }
}
