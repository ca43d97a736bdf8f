use thiserror::Error;

/// Errors across the library. Budget exhaustion is typed separately from
/// validation failures so callers can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("context/label length mismatch: {contexts} contexts vs {labels} labels")]
    LengthMismatch { contexts: usize, labels: usize },

    #[error("label {label} out of range for alphabet of size {size}")]
    LabelOutOfRange { label: usize, size: usize },

    #[error("context {context} out of range for alphabet of size {size}")]
    ContextOutOfRange { context: usize, size: usize },

    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },

    #[error("invalid prefix: {labels} labels must equal {contexts} contexts or one less")]
    InvalidPrefix { contexts: usize, labels: usize },

    #[error("hypothesis class must contain at least one expert")]
    EmptyClass,

    #[error("no lookup entry for history (contexts {contexts:?}, labels {labels:?})")]
    MissingHistory {
        contexts: Vec<usize>,
        labels: Vec<usize>,
    },

    #[error("enumeration needs {needed} candidates, exceeding budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("truncation level {0} outside the open interval (0, 1/2)")]
    InvalidTruncation(f64),

    #[error("grid resolution {0} outside the interval (0, 0.1]")]
    InvalidGridResolution(f64),

    #[error("tree depth {tree_depth} plus prefix length {prefix_len} does not equal horizon {horizon}")]
    DepthMismatch {
        tree_depth: usize,
        prefix_len: usize,
        horizon: usize,
    },

    #[error("context constraint allows no context at round {round}")]
    EmptyConstraint { round: usize },

    #[error("unsupported input: {required}, got {got}")]
    Unsupported { required: String, got: String },

    #[error("class spec error at `{path}`: {message}")]
    ClassSpec { path: String, message: String },

    #[error("class has empty support: every label sequence has zero likelihood")]
    EmptySupport,

    #[error("sub-probability member {index} has total mass {mass} exceeding 1")]
    MassExceedsOne { index: usize, mass: f64 },

    #[error("design needs dimension >= horizon {horizon}, got {dim}")]
    DimensionTooSmall { horizon: usize, dim: usize },

    #[error("horizon {horizon} too large: {reason}")]
    HorizonTooLarge { horizon: usize, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
