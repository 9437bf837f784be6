use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants line up with the CLI exit-status contract: `Usage`,
/// `Domain` and `Config` are caller mistakes, `Capability` means a
/// desk-scale bound was exceeded, `Internal` means an invariant that the
/// construction guarantees was violated.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid config at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("capability bound exceeded: {what} = {value} exceeds {limit}; {hint}")]
    Capability {
        what: String,
        value: String,
        limit: String,
        hint: String,
    },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
