use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("disjointness violated: index `{0}` present in both operands")]
    Overlap(String),

    #[error("capacity exceeded: {what} has cardinality {cardinality}, bound is {bound}")]
    Capacity {
        what: String,
        cardinality: u128,
        bound: u128,
    },

    #[error("unknown locus `{0}`")]
    UnknownLocus(String),

    #[error("excitation trace exhausted at step index {0}")]
    TraceExhausted(usize),

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("expression error in {context}: {msg}")]
    Expr { context: String, msg: String },

    #[error("validation failed [{check}]: {detail}")]
    Validation { check: String, detail: String },

    #[error("range check failed: functionality `{functionality}` assigns {value} to `{variable}`, outside its domain (stimulus {stimulus})")]
    RangeCheck {
        functionality: String,
        variable: String,
        value: String,
        stimulus: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cone is not acyclic; demonstrations require an acyclic cone")]
    NotAcyclic,

    #[error("profile support is not contained in the cone edge; offenders: {0}")]
    Binding(String),

    #[error("internal consistency violated replaying walk {walk}: {detail}")]
    InternalConsistency { walk: usize, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn validation(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation {
            check: check.into(),
            detail: detail.into(),
        }
    }
}
