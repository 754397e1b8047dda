use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("action {index} out of range for {n_actions} actions")]
    InvalidAction { index: usize, n_actions: usize },

    #[error("inconsistent history: no function in the version space matches action {action} -> {observed}")]
    InconsistentHistory { action: usize, observed: String },

    #[error("class has {size} functions, above the solver cap of {cap}")]
    CapExceeded { cap: usize, size: usize },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("no function in the class is consistent with the sample")]
    NoConsistentFunction,

    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }

    /// Short machine-readable tag used in trial records.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidAction { .. } => "invalid_action",
            Error::InconsistentHistory { .. } => "inconsistent_history",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::Construction(_) => "construction",
            Error::Decode(_) => "decode",
            Error::Protocol(_) => "protocol",
            Error::NoConsistentFunction => "no_consistent_function",
            Error::Refused(_) => "refused",
            Error::Parse(_) => "parse",
        }
    }
}
