//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// A file operation that failed, with the path it failed on.
#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct FileError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

/// Errors from constructing or transforming discrete random variables.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DrvError {
    #[error("value {0} is not finite")]
    NonFiniteValue(f64),
    #[error("probability {prob} attached to value {value} must be finite and non-negative")]
    BadProbability { value: f64, prob: f64 },
    #[error("a distribution needs at least one entry with positive mass")]
    EmptySupport,
    #[error("probabilities sum to {sum}, expected 1 within {tol}")]
    MassNotNormalized { sum: f64, tol: f64 },
    #[error("uniform grid needs min < max and count >= 2, got [{min}, {max}] with {count}")]
    InvalidGrid { min: f64, max: f64, count: usize },
    #[error("quantile rank {0} is outside [0, 1]")]
    RankOutOfRange(f64),
    #[error("function produced non-finite output {output} at input {input}")]
    NonFiniteImage { input: f64, output: f64 },
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("aggregator bound k must be at least 2, got {0}")]
    BoundTooSmall(usize),
    #[error("minimal cluster size must be at least 1")]
    ZeroMinPoints,
}

/// Structural errors in model construction or state handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model needs at least one concept")]
    NoConcepts,
    #[error("duplicate concept name `{0}`")]
    DuplicateConcept(String),
    #[error("weight matrix must be {expected}x{expected}, got row {row} of length {got}")]
    WeightShape { expected: usize, row: usize, got: usize },
    #[error("weight matrix has {got} rows, expected {expected}")]
    WeightRows { expected: usize, got: usize },
    #[error("weight w[{row}][{col}] has support outside [-1, 1] (value {value})")]
    WeightOutOfRange { row: usize, col: usize, value: f64 },
    #[error("initial state has {got} entries, expected {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("clamp refers to concept index {index}, but the model has {concepts} concepts")]
    ClampIndex { index: usize, concepts: usize },
    #[error("state vector has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Errors raised while running the reasoning loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Drv(#[from] DrvError),
}

/// Errors from the reference implementations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("joint enumeration for concept {concept} needs {size} assignments, limit is {limit}")]
    CapacityExceeded { concept: usize, size: u128, limit: u128 },
    #[error("{context} requires a fully singleton {what}")]
    NotSingleton { context: &'static str, what: &'static str },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl From<DrvError> for OracleError {
    fn from(e: DrvError) -> Self {
        OracleError::Engine(EngineError::Drv(e))
    }
}

impl From<ModelError> for OracleError {
    fn from(e: ModelError) -> Self {
        OracleError::Engine(EngineError::Model(e))
    }
}

/// A model-file parse failure, tagged with the 1-based source line.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("entry appears before any section header")]
    EntryOutsideSection,
    #[error("duplicate concept `{0}`")]
    DuplicateConcept(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: String, to: String },
    #[error("weight {0} is outside [-1, 1]")]
    WeightOutOfRange(f64),
    #[error("malformed {what}: `{token}`")]
    Malformed { what: &'static str, token: String },
    #[error("probabilities sum to {0}, expected 1 within 1e-6")]
    PmfNotNormalized(f64),
    #[error("duplicate initial value for concept `{0}`")]
    DuplicateInit(String),
    #[error("duplicate clamp for concept `{0}`")]
    DuplicateClamp(String),
    #[error("invalid distribution: {0}")]
    BadDistribution(DrvError),
    #[error("model is structurally invalid: {0}")]
    BadModel(ModelError),
}

impl ParseError {
    pub(crate) fn new(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, kind }
    }
}
