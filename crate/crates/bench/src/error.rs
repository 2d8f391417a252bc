use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("reference solvers disagree on {problem}: relative difference {difference:e} > {limit:e}")]
    ReferenceDisagreement {
        problem: String,
        difference: f64,
        limit: f64,
    },
    #[error("reference solve of {problem} with {algorithm} failed: {retcode}")]
    ReferenceFailed {
        problem: String,
        algorithm: String,
        retcode: String,
    },
    #[error("no points to write")]
    NoPoints,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("plot error: {0}")]
    Plot(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] parex::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
