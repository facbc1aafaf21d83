//! Error type shared across the toolkit.
//!
//! Every fallible operation returns [`Error`]; the variants distinguish
//! caller mistakes (bad input, mismatched graphs, violated preconditions)
//! from resource exhaustion and from internal invariant failures that
//! indicate a bug in the library itself.

/// Unified error type for all toolkit operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A word string used a generator name not present in the graph.
    #[error("unknown generator `{token}` at position {position}")]
    UnknownGenerator { token: String, position: usize },

    /// A letter referred to a vertex index outside the graph.
    #[error("letter index {index} out of range for graph with {vertex_count} vertices")]
    LetterOutOfRange { index: usize, vertex_count: usize },

    /// Two operands were built over different defining graphs.
    #[error("graph mismatch between operands")]
    GraphMismatch,

    /// The operation is undefined on the identity element.
    #[error("{op}: identity input not allowed")]
    IdentityInput { op: &'static str },

    /// A documented precondition of the operation was violated.
    #[error("{op}: precondition violated: {detail}")]
    Precondition { op: &'static str, detail: String },

    /// A configured or built-in resource ceiling was reached.
    #[error("resource limit exceeded: {detail}")]
    ResourceLimit { detail: String },

    /// An internal consistency check failed; this is a bug, not user error.
    #[error("internal consistency failure: {detail}")]
    Internal { detail: String },

    /// The defining graph itself is malformed.
    #[error("invalid graph: {detail}")]
    InvalidGraph { detail: String },

    /// Input text (word, JSON document, claim line) failed to parse.
    #[error("parse error: {detail}")]
    Parse { detail: String },
}

impl Error {
    pub(crate) fn internal(detail: impl Into<String>) -> Self {
        Error::Internal { detail: detail.into() }
    }

    pub(crate) fn precondition(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition { op, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
