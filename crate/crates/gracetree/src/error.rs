use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The caller supplied data outside an operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An input violated a documented precondition of a construction.
    #[error("contract violation: {0}")]
    ContractViolation(String),
    /// A transfer's label-sum condition failed.
    #[error("transfer rejected: {0}")]
    TransferRejected(String),
    /// A transfer plan could not be replayed.
    #[error("replay failed at step {step}: {reason}")]
    ReplayFailure { step: usize, reason: String },
    /// The brute-force oracle declined an instance above its size cap.
    #[error("refused: {0}")]
    Refused(String),
    /// An internal invariant broke; this is a bug.
    #[error("defect: {0}")]
    Defect(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::ContractViolation(msg.into()))
}
