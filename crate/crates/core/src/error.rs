use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entity set must contain at least one entity")]
    EmptyEntitySet,
    #[error("duplicate entity label `{0}`")]
    DuplicateEntity(String),
    #[error("unknown entity label `{0}`")]
    UnknownEntity(String),
    #[error("entity index {index} out of range for {size} entities")]
    EntityOutOfRange { index: usize, size: usize },
    #[error("relations are defined over different entity sets")]
    EntitySetMismatch,
    #[error("closure requires a non-empty base set of relations")]
    EmptyBase,
    #[error("relation index {0} out of range")]
    RelationOutOfRange(usize),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("permutation {0:?} is not a bijection")]
    NotAPermutation(Vec<usize>),
    #[error("group element acts on {expected} entities, query space has {found}")]
    GroupSizeMismatch { expected: usize, found: usize },
    #[error("inconsistent family sign for query {0}")]
    InconsistentSign(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("renaming does not preserve the kernel (max leak {leak:.3e}); lift undefined")]
    KernelNotInvariant { leak: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid block specification: {0}")]
    InvalidBlockSpec(String),
    #[error("map is not converse-invariant at query {query} (deviation {deviation:.3e})")]
    NotConverseInvariant { query: String, deviation: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate relation draw at density {0} (empty or full twice)")]
    DegenerateDensity(f64),
    #[error("training diverged at step {step}")]
    Diverged { step: usize },
    #[error("non-finite value in report field `{0}`")]
    NonFinite(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}
