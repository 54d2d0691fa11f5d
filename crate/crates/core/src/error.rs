use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row")]
    EmptyMatrix,
    #[error("matrix is not square: row {row} has {len} entries, expected {dim}")]
    NotSquare { row: usize, len: usize, dim: usize },
    #[error("entry ({row}, {col}) = {value} is not 0 or 1")]
    NotBinary { row: usize, col: usize, value: f64 },
    #[error("entry ({row}, {col}) = {value} is negative or not a number")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("empty matrix sequence")]
    EmptyProduct,
    #[error("zero spectral radius")]
    ZeroSpectralRadius,
    #[error("support is not primitive")]
    NotPrimitive,
    #[error("finite branch: row {0} of the tree shape is zero, not an infinite tree")]
    ZeroRow(usize),
    #[error("generator index {index} out of range for d = {d}")]
    GeneratorOutOfRange { index: usize, d: usize },
    #[error("search bound exceeded: d = {0} > 12")]
    SearchBoundExceeded(usize),
    #[error("word {0:?} is not admissible in the tree")]
    InadmissibleWord(Vec<usize>),
    #[error("ray inadmissible: {0}")]
    InadmissibleRay(String),
    #[error("empty word")]
    EmptyWord,
    #[error("empty set of words")]
    EmptyWordSet,
    #[error("size guard exceeded: {what} = {size} > {limit}")]
    SizeGuard { what: &'static str, size: u128, limit: u128 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("rate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
