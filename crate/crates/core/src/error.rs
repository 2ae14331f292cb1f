use thiserror::Error;

/// Errors raised by parsers, program validation and bounded searches.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("relation {rel} used with arity {first} and {second}")]
    ArityConflict {
        rel: String,
        first: usize,
        second: usize,
    },

    #[error("relation {0} occurs in both the source and the target schema")]
    SchemaOverlap(String),

    #[error("program mixes annotated and plain dependencies")]
    MixedProgram,

    #[error("{0}")]
    Annotation(String),

    #[error("unsafe egd: {0}")]
    UnsafeEgd(String),

    #[error("unsafe query: {0}")]
    UnsafeQuery(String),

    #[error("valuation does not cover null {0}")]
    MissingValuation(String),

    #[error("search budget exceeded: {0}")]
    Budget(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
