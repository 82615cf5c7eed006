use thiserror::Error;

/// Errors raised by environments, featurizers, parsers and agents.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("action index {index} out of range for space of size {size}")]
    ActionOutOfRange { index: usize, size: usize },
    #[error("label `{0}` is not in the pool vocabulary")]
    VocabularyViolation(String),
    #[error("invalid sample weight {0}; weights must be finite and non-negative")]
    InvalidWeight(f64),
    #[error("sample id `{0}` already present in the pool")]
    DuplicateSample(String),
    #[error("data pool has no sample with positive weight")]
    EmptyPool,
    #[error("episode is finished; call reset before stepping")]
    EpisodeFinished,
    #[error("episode has not been started; call reset first")]
    NotReset,
    #[error("sample has no tokens")]
    EmptySample,
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("line {line}: embedding has dimension {found}, expected {expected}")]
    EmbeddingDimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Schema { line: usize, msg: String },
    #[error("invalid synthetic corpus spec: {0}")]
    Spec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
