use thiserror::Error;

/// Errors raised when validating or combining tabular objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("negative probability mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("a distribution needs at least one state")]
    ZeroStates,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("softmax temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("cannot average an empty list of policies")]
    EmptyList,
    #[error("interaction matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

impl CoreError {
    pub(crate) fn dims(expected: impl ToString, got: impl ToString) -> Self {
        CoreError::DimensionMismatch { expected: expected.to_string(), got: got.to_string() }
    }
}

/// Errors raised by environment constructors and the registry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParam { name: String, value: f64, reason: String },
    #[error("unknown parameter `{name}` for environment `{env}`")]
    UnknownParam { env: String, name: String },
    #[error("interaction matrix is not skew-symmetric: A[{row}][{col}] + A[{col}][{row}] = {gap}")]
    NotSkewSymmetric { row: usize, col: usize, gap: f64 },
    #[error("unknown environment `{0}`")]
    UnknownEnv(String),
}

impl EnvError {
    pub(crate) fn invalid(name: &str, value: f64, reason: &str) -> Self {
        EnvError::InvalidParam { name: name.to_string(), value, reason: reason.to_string() }
    }
}

/// Errors raised by the random game generator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GarnetError {
    #[error("invalid garnet spec: {0}")]
    InvalidSpec(String),
    #[error("branching factor {branching} must lie in [1, {n_states}]")]
    InvalidBranching { branching: usize, n_states: usize },
}

/// Errors raised by solver configuration and dispatch.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}
