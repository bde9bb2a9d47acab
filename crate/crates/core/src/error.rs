use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid progression: {0}")]
    InvalidProgression(String),
    #[error("progression leaves the grid at {0:?}")]
    OutOfGrid(Vec<i64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not an interval of a line: {0}")]
    NotAnInterval(String),
    #[error("linearly dependent vectors")]
    DependentBasis,
    #[error("internal invariant broken: {0}")]
    Invariant(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape condition fails: {0}")]
    ShapeCondition(String),
    #[error("window empty: lower end {lo} exceeds upper end {hi}")]
    WindowEmpty { lo: f64, hi: f64 },
    #[error("s = {s} outside window [{lo}, {hi}]")]
    OutsideWindow { s: usize, lo: f64, hi: f64 },
    #[error("size cap exceeded: {size} > {cap}")]
    CapExceeded { size: usize, cap: usize },
}
