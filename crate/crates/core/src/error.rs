use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An object failed validation; every offending item is listed.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("disconnected graph: node {node} is not reachable from node 0 (component of size {component_size})")]
    Disconnected { node: usize, component_size: usize },

    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceCap {
        what: String,
        requested: usize,
        cap: usize,
    },

    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
