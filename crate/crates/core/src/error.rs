use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid exponent {0}: must lie in [1, inf]")]
    InvalidExponent(f64),

    #[error("outside admissible region: {0}")]
    OutsideAdmissibleRegion(String),

    #[error("invalid measure space: {0}")]
    InvalidMeasure(String),

    #[error("invalid normed space: {0}")]
    InvalidNorm(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("incompatible spaces: {0}")]
    IncompatibleSpaces(String),

    #[error("no norming functional selected for the zero vector")]
    NoNormingFunctional,

    #[error("sparsity {sparsity} out of range 1..={points}")]
    SparsityOutOfRange { sparsity: usize, points: usize },

    #[error("iteration diverged: {0}")]
    IterationDiverged(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("insufficient grid resolution: {0}")]
    InsufficientResolution(String),

    #[error("empty dilation grid")]
    EmptyDilationGrid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
