use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),

    #[error("domain has no interior node at resolution n = {0}")]
    NoInteriorNodes(usize),

    #[error("node index {index} out of range for grid with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("field length {found} does not match grid with {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },

    #[error("grid has no pinned zero-valued boundary node")]
    NoBoundary,

    #[error("distance field is identically zero")]
    ZeroDistance,

    #[error("need at least two interior nodes, found {0}")]
    TooFewNodes(usize),

    #[error("interior node {node} has {count} neighbors, the pair search needs at least 2")]
    DegenerateStencil { node: usize, count: usize },

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("normalization collapsed: the {0} part of the iterate vanished")]
    NormalizationCollapse(&'static str),

    #[error("laplacian mode {requested} exceeds the available basis size {available}")]
    ModeOutOfRange { requested: usize, available: usize },

    #[error("malformed field file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
