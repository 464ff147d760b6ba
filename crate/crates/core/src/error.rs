use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("signature mismatch: {0}")]
    Signature(String),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("unassigned variable `{0}`")]
    Unassigned(String),
    #[error("flavor mismatch: {0}")]
    FlavorMismatch(String),
    #[error("search budget exhausted after {visited} nodes")]
    Budget { visited: u64 },
    #[error("search deadline passed after {visited} nodes")]
    Timeout { visited: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("size {requested} exceeds cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("internal alarm: {0}")]
    Alarm(String),
}

impl Error {
    /// Input-side problems, as opposed to alarms and resource limits.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Signature(_)
                | Error::InvalidAlgebra(_)
                | Error::InvalidFrame(_)
                | Error::Unassigned(_)
                | Error::FlavorMismatch(_)
                | Error::Precondition(_)
                | Error::CapExceeded { .. }
        )
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::Timeout { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
