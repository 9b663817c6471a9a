use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for {len} qubits")]
    OutOfRange { index: usize, len: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (relative deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid probability assignment: {0}")]
    InvalidProbability(String),

    #[error("resource guard: {what} = {value} exceeds limit {limit}")]
    Guard {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("code vectors are linearly dependent")]
    DependentVectors,

    #[error("number of codewords {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("state is not normalized: {0}")]
    NotNormalized(String),

    #[error("pair is not correctable (Knill-Laflamme residual {0:e})")]
    NotCorrectable(f64),

    #[error("eigenvalue {value:e} of M lies too close to the rank threshold {threshold:e}")]
    AmbiguousEigenvalue { value: f64, threshold: f64 },

    #[error("state is not supported on the code (leakage {0:e})")]
    OutsideCode(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}
