use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("right-hand side returned a non-finite value")]
    NonFiniteRhs,
    #[error("non-finite state in row with {substeps} substeps")]
    NonFiniteState { substeps: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}
