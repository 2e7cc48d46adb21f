use thiserror::Error;

/// Errors raised by the auction model, learners and experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation (bid outside its
    /// bid set, non-normalized distribution, bidder not in the top group, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed the configured profile-count guard.
    #[error("capacity exceeded: {profiles} profiles > limit {limit}")]
    Capacity { profiles: u128, limit: u128 },

    /// A learner, run or batch configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    /// Reading or writing an artifact failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
