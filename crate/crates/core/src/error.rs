use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input rejected before any computation.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A numerical target could not be met at the working precision.
    #[error("precision failure: {0}")]
    Precision(String),
    /// An internal consistency check failed.
    #[error("check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) => 2,
            Error::Precision(_) => 3,
            Error::Check(_) => 3,
        }
    }
}
