//! Work-precision benchmarking for the `parex` solvers.
//!
//! A sweep solves one problem for every (algorithm, tolerance) pair, times
//! the median of several repeats and measures the final-time error against a
//! reference computed by two independent solver families that must agree.

// `!(x <= y)` is used on purpose so that NaN takes the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convergence;
mod error;
pub mod output;
pub mod reference;
pub mod sweep;

pub use config::BenchConfig;
pub use convergence::{convergence_study, ConvergenceTable};
pub use error::{BenchError, Result};
pub use output::{read_csv, write_csv, write_svg, CSV_HEADER};
pub use reference::{error_metric, make_reference, ReferenceSolution};
pub use sweep::{monotonicity_violations, run_sweep, SweepConfig, WorkPrecisionPoint};
