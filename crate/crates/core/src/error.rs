use thiserror::Error;

/// Errors raised by group arithmetic, representation construction, and the
/// simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QhsError {
    #[error("element index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("subgroup is not normal; the induced operation on cosets is not well defined")]
    NotNormal,

    #[error("group order {order} exceeds the limit of {limit} for this operation")]
    OrderLimit { order: usize, limit: usize },

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    #[error("representation is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("gcd({a}, {n}) != 1")]
    NotCoprime { a: u64, n: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

impl QhsError {
    pub(crate) fn parse(what: &'static str, input: impl Into<String>) -> Self {
        QhsError::Parse {
            what,
            input: input.into(),
        }
    }
}

pub type Result<T, E = QhsError> = std::result::Result<T, E>;
