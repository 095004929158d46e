use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient moments: `{label}` has moments up to order {available}, order {required} is required")]
    InsufficientMoments {
        label: String,
        required: usize,
        available: usize,
    },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("degenerate knot set: {0}")]
    DegenerateKnots(String),

    #[error("Gauss knot {knot} outside domain of half-width {half_width}")]
    GaussKnotOutsideDomain { knot: f64, half_width: f64 },

    #[error("ladder construction failed: {0}")]
    Ladder(String),

    #[error("level {level} required but the ladder for coordinate {coordinate} only has {depth} levels")]
    LevelOutOfRange {
        level: usize,
        coordinate: usize,
        depth: usize,
    },

    #[error("dimension {dim} too small: degree {degree} needs d >= {min}")]
    DimensionTooSmall { dim: usize, degree: usize, min: usize },

    #[error("empty point family: k = {k} exceeds d = {d}")]
    EmptyFamily { k: usize, d: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("coefficient solve failed: {0}")]
    SolveFailed(String),

    #[error("construction integrity: {0}")]
    Integrity(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("rule is not centrally symmetric")]
    NotCentrallySymmetric,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("schema: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
