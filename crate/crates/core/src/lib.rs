//! Parallel extrapolation methods for small systems of ordinary differential equations.
//!
//! The solvers compute a column of low-order approximations `T_{j,1}` of one
//! step with a base method run at `n_j` internal substeps, then extrapolate
//! the step size to zero. The rows are independent, so they are distributed
//! over a persistent worker pool with a static, load-balanced schedule.
//!
//! Five algorithm families are provided (see [`Algorithm`]):
//!
//! * explicit two-step midpoint with barycentric extrapolation
//!   ([`Algorithm::MidpointDeuflhard`], [`Algorithm::MidpointHairerWanner`]),
//! * linearly-implicit Euler with Aitken–Neville or barycentric extrapolation
//!   ([`Algorithm::ImplicitEuler`], [`Algorithm::ImplicitEulerBarycentric`]),
//! * linearly-implicit midpoint with Gragg smoothing
//!   ([`Algorithm::ImplicitHairerWanner`]).
//!
//! ```
//! use parex::{solve, Algorithm, OdeProblem, SolverOptions, Tolerances};
//!
//! let problem = OdeProblem::new(|du, u, _p, _t| du[0] = -u[0], vec![1.0], (0.0, 1.0));
//! let tol = Tolerances::new(1e-10, 1e-10).unwrap();
//! let sol = solve(&problem, Algorithm::ImplicitEuler, &SolverOptions::default(), tol).unwrap();
//! assert!(sol.retcode.is_success());
//! assert!((sol.final_state()[0] - (-1.0f64).exp()).abs() < 1e-8);
//! ```

// `!(x <= y)` is used on purpose so that NaN takes the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod controller;
mod error;
pub mod extrapolation;
pub mod linalg;
pub mod ode;
pub mod problems;
pub mod scheduler;
pub mod solvers;
pub mod steppers;

pub use error::{Error, Result};
pub use extrapolation::{BarycentricTableau, SequenceKind, SubdividingSequence};
pub use linalg::{DenseMatrix, LuFactors};
pub use ode::{
    validate, OdeProblem, RetCode, Solution, SolverOptions, Stats, StepRecord, Threading,
    Tolerances,
};
pub use problems::NamedProblem;
pub use solvers::{solve, solve_fixed, Algorithm};
