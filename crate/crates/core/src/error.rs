use thiserror::Error;

/// Errors raised by operator algebra, contraction and protocol construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("label `{0}` appears in both operands")]
    LabelCollision(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("not a permutation of the operator labels: {0}")]
    NotAPermutation(String),

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("dimension mismatch on `{label}`: {left} vs {right}")]
    DimMismatch {
        label: String,
        left: usize,
        right: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("malformed network: {0}")]
    MalformedNetwork(String),

    #[error("specification mismatch: {0}")]
    SpecMismatch(String),

    #[error("contraction too large: peak intermediate dimension {peak} exceeds cap {cap}")]
    ContractTooLarge { peak: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bad state: {0}")]
    BadState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
