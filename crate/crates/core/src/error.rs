use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("degenerate immersion: {0}")]
    DegenerateImmersion(String),

    #[error("no sign change of H_f on the search bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("invalid product immersion: {0}")]
    InvalidProduct(String),

    #[error("degenerate element {element}: area {area:e} below threshold")]
    DegenerateElement { element: usize, area: f64 },

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("OFF parse error at line {line}: {msg}")]
    OffParse { line: usize, msg: String },

    #[error("ill-conditioned mass matrix: {0}")]
    IllConditionedMass(String),

    #[error("eigenvalue bracket not established: {0}")]
    BracketNotEstablished(String),

    #[error("composition not applicable: {0}")]
    CompositionNotApplicable(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported for user charts: {0}")]
    UnsupportedForUserChart(String),

    #[error("inconsistent tangent decomposition: {0}")]
    InconsistentDecomposition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown scene or ambient key: {0}")]
    UnknownKey(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
