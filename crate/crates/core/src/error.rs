use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exhaustive search would enumerate more hypotheses than allowed.
    #[error("refusing to enumerate {count} hypotheses (cap {cap}); pass {flag} to override")]
    CapExceeded { count: u128, cap: u128, flag: &'static str },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
