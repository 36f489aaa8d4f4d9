use thiserror::Error;

/// Errors raised by the geometric primitives.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("plane does not meet the interior of the polytope")]
    NoSplit,
    #[error("plane passes within {distance:.3e} of a vertex (tolerance {eps:.3e})")]
    NearTangent { distance: f64, eps: f64 },
    #[error("degenerate polytope: {0}")]
    Degenerate(String),
}

/// Errors raised by the stochastic construction.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("cell count {count} exceeds the configured cap {cap}")]
    CellCapExceeded { count: usize, cap: usize },
    #[error("internal sampling failure: {0}")]
    Sampling(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Errors raised while extracting and classifying the combinatorial structure.
#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("carrier resolution failed for polygon {polygon} side {side}: {detail}")]
    Carrier {
        polygon: u32,
        side: usize,
        detail: String,
    },
    #[error("mark placement failed: {0}")]
    Mark(String),
    #[error("vertex classification failed: {0}")]
    Vertex(String),
    #[error("plate extraction failed on polygon {polygon}: {detail}")]
    Plate { polygon: u32, detail: String },
}

/// Errors raised by the estimators.
#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("need at least {needed} replicates, got {got}")]
    TooFewReplicates { needed: usize, got: usize },
    #[error("margin {0} outside [0, 0.4)")]
    Margin(f64),
    #[error("no eligible {0} in any replicate; use a larger time or a smaller margin")]
    Empty(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Errors raised by the numerical evaluation of probabilities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("quadrature hit the depth limit: value {value:.12e}, error bound {bound:.3e}")]
    DepthExhausted { value: f64, bound: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("analytic routes disagree: {0}")]
    Inconsistent(String),
}
