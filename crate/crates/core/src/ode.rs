//! Problem, options and solution types shared by every solver.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extrapolation::SequenceKind;
use crate::linalg::DenseMatrix;
use crate::solvers::Algorithm;

/// Right-hand side `du = f(u, p, t)`.
pub type RhsFn = dyn Fn(&mut [f64], &[f64], &[f64], f64) + Send + Sync;
/// Jacobian `J = ∂f/∂u` at `(u, p, t)`.
pub type JacobianFn = dyn Fn(&mut DenseMatrix, &[f64], &[f64], f64) + Send + Sync;

/// An initial value problem `u' = f(u, p, t)`, `u(t0) = u0`.
///
/// The right-hand side and Jacobian are shared by all workers of a solve and
/// must therefore be re-entrant.
#[derive(Clone)]
pub struct OdeProblem {
    rhs: Arc<RhsFn>,
    jacobian: Option<Arc<JacobianFn>>,
    pub u0: Vec<f64>,
    pub tspan: (f64, f64),
    pub params: Vec<f64>,
}

impl OdeProblem {
    pub fn new<F>(rhs: F, u0: Vec<f64>, tspan: (f64, f64)) -> Self
    where
        F: Fn(&mut [f64], &[f64], &[f64], f64) + Send + Sync + 'static,
    {
        Self {
            rhs: Arc::new(rhs),
            jacobian: None,
            u0,
            tspan,
            params: Vec::new(),
        }
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&mut DenseMatrix, &[f64], &[f64], f64) + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn without_jacobian(mut self) -> Self {
        self.jacobian = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn rhs(&self, du: &mut [f64], u: &[f64], t: f64) {
        (self.rhs)(du, u, &self.params, t)
    }

    pub fn rhs_fn(&self) -> &RhsFn {
        &*self.rhs
    }

    pub fn jacobian_fn(&self) -> Option<&JacobianFn> {
        self.jacobian.as_deref()
    }
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("dim", &self.dim())
            .field("tspan", &self.tspan)
            .field("params", &self.params.len())
            .field("jacobian", &self.has_jacobian())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abstol: f64,
    pub reltol: f64,
}

impl Tolerances {
    pub fn new(abstol: f64, reltol: f64) -> Result<Self> {
        let tol = Self { abstol, reltol };
        tol.check()?;
        Ok(tol)
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [("abstol", self.abstol), ("reltol", self.reltol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// When to run the rows of a step on the worker pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threading {
    Off,
    On,
    /// Parallel only for steps with at least 4 rows on systems with at least
    /// 10 equations; below that the handoff costs more than it saves.
    Auto,
}

impl Threading {
    pub fn enabled_for(self, rows: usize, dim: usize) -> bool {
        match self {
            Threading::Off => false,
            Threading::On => true,
            Threading::Auto => rows >= 4 && dim >= 10,
        }
    }
}

/// Step-size and order control settings. Orders count rows of the
/// extrapolation table.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub min_order: usize,
    pub init_order: usize,
    pub max_order: usize,
    pub sequence: SequenceKind,
    pub threading: Threading,
    pub num_workers: usize,
    /// Safety factor γ of the step controller.
    pub safety: f64,
    /// Lower clamp of the step scaling `q`; `1/q_min` is the largest growth.
    pub q_min: f64,
    /// Upper clamp of `q`; `1/q_max` is the largest shrink.
    pub q_max: f64,
    pub dt_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            min_order: 3,
            init_order: 5,
            max_order: 10,
            sequence: SequenceKind::Harmonic,
            threading: Threading::Auto,
            num_workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            safety: 0.9,
            q_min: 0.2,
            q_max: 10.0,
            dt_init: None,
            max_steps: 100_000,
        }
    }
}

impl SolverOptions {
    pub fn with_orders(mut self, min: usize, init: usize, max: usize) -> Self {
        self.min_order = min;
        self.init_order = init;
        self.max_order = max;
        self
    }

    pub fn with_threading(mut self, threading: Threading, num_workers: usize) -> Self {
        self.threading = threading;
        self.num_workers = num_workers;
        self
    }
}

/// Largest row count accepted for the explicit midpoint families; the
/// harmonic tableau loses stability beyond it.
pub const MAX_EXPLICIT_ORDER: usize = 15;

/// Checks a problem/options pair before integration.
pub fn validate(
    problem: &OdeProblem,
    alg: Algorithm,
    opts: &SolverOptions,
    tol: &Tolerances,
) -> Result<()> {
    let (t0, tf) = problem.tspan;
    if !(t0.is_finite() && tf.is_finite() && tf > t0) {
        return Err(Error::Config(format!("tspan ({t0}, {tf}) must satisfy t0 < tf")));
    }
    if problem.u0.is_empty() {
        return Err(Error::Config("u0 must not be empty".into()));
    }
    if problem.u0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("u0 must be finite".into()));
    }
    tol.check()?;
    if opts.min_order < 2 {
        return Err(Error::Config(format!(
            "min_order must be at least 2 (error estimate needs two rows), got {}",
            opts.min_order
        )));
    }
    if !(opts.min_order <= opts.init_order && opts.init_order <= opts.max_order) {
        return Err(Error::Config(format!(
            "order window must satisfy min <= init <= max, got ({}, {}, {})",
            opts.min_order, opts.init_order, opts.max_order
        )));
    }
    if alg.is_explicit() && opts.max_order > MAX_EXPLICIT_ORDER {
        return Err(Error::Config(format!(
            "max_order {} exceeds {MAX_EXPLICIT_ORDER} for explicit midpoint extrapolation",
            opts.max_order
        )));
    }
    if opts.num_workers == 0 {
        return Err(Error::Config("num_workers must be positive".into()));
    }
    if !(opts.safety > 0.0 && opts.safety < 1.0) {
        return Err(Error::Config(format!("safety must lie in (0, 1), got {}", opts.safety)));
    }
    if !(opts.q_min > 0.0 && opts.q_min < 1.0 && opts.q_max > 1.0 && opts.q_max.is_finite()) {
        return Err(Error::Config(format!(
            "step clamps must satisfy 0 < q_min < 1 < q_max, got ({}, {})",
            opts.q_min, opts.q_max
        )));
    }
    if let Some(dt) = opts.dt_init {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt_init must be positive, got {dt}")));
        }
    }
    if opts.max_steps == 0 {
        return Err(Error::Config("max_steps must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetCode {
    Success,
    MaxStepsExceeded,
    StepUnderflow,
    SingularFailure,
}

impl RetCode {
    pub fn is_success(self) -> bool {
        self == RetCode::Success
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RetCode::Success => "success",
            RetCode::MaxStepsExceeded => "max_steps_exceeded",
            RetCode::StepUnderflow => "step_underflow",
            RetCode::SingularFailure => "singular_failure",
        }
    }
}

impl fmt::Display for RetCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Work counters. `nf` counts every right-hand-side evaluation, including
/// those spent on finite-difference Jacobians.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub nf: u64,
    pub njac: u64,
    pub nlu: u64,
    pub nsolve: u64,
    pub naccept: u64,
    pub nreject: u64,
}

/// One attempted step of the adaptive loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub h: f64,
    /// Number of table rows computed during the attempt.
    pub rows: usize,
    /// Order the step was attempted at.
    pub order: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub ts: Vec<f64>,
    pub us: Vec<Vec<f64>>,
    pub stats: Stats,
    pub retcode: RetCode,
    pub steps: Vec<StepRecord>,
}

impl Solution {
    pub fn final_state(&self) -> &[f64] {
        self.us.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.ts.last().copied().unwrap_or(f64::NAN)
    }
}
