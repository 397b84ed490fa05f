use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tuple has duplicate entries")]
    DuplicateEntries,
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variable {0:?} has no rank")]
    UnrankedVariable(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("invalid predicate: {0}")]
    InvalidPredicate(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("conditioning on a prefix with zero mass: {0:?}")]
    ConditioningFailure(Vec<i64>),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("constraint {0} is not a width-3 NBTW constraint on distinct variables")]
    NotNbtw(usize),
    #[error("bucket count {buckets} does not divide domain size {domain}")]
    DivisibilityError { buckets: usize, domain: usize },
    #[error("bucket count {buckets} does not divide table size {domain} of vertex {vertex}")]
    BucketSizeMismatch { vertex: String, buckets: usize, domain: usize },
    #[error("function mean is {actual}, expected {expected}")]
    MeanMismatch { expected: String, actual: String },
    #[error("coordinate {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
