//! Tolerance sweeps producing work-precision points.

use std::time::Instant;

use parex::problems::NamedProblem;
use parex::{solve, Algorithm, Solution, SolverOptions, Threading, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::reference::{error_metric, ReferenceSolution};

/// One (algorithm, tolerance, threading) measurement. Field order is the CSV
/// column order. A failed solve has an infinite `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkPrecisionPoint {
    pub problem: String,
    pub algorithm: String,
    pub threaded: bool,
    pub reltol: f64,
    pub abstol: f64,
    pub error: f64,
    pub runtime_s: f64,
    pub nf: u64,
    pub njac: u64,
    pub nlu: u64,
    pub nsolve: u64,
    pub naccept: u64,
    pub nreject: u64,
}

impl WorkPrecisionPoint {
    pub fn failed(&self) -> bool {
        !self.error.is_finite()
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub algorithms: Vec<Algorithm>,
    /// `(reltol, abstol)` pairs.
    pub tol_grid: Vec<(f64, f64)>,
    pub repeats: usize,
    pub warmup: usize,
    /// Threading variants to run; `true` uses `workers` threads.
    pub threaded: Vec<bool>,
    pub workers: usize,
}

impl SweepConfig {
    /// The problem's tuned algorithms and tolerance grid, five timed repeats
    /// after one warmup, serial and threaded.
    pub fn for_problem(named: &NamedProblem, workers: usize) -> Self {
        Self {
            algorithms: named.algorithms(),
            tol_grid: named.default_tol_grid.clone(),
            repeats: 5,
            warmup: 1,
            threaded: vec![false, true],
            workers,
        }
    }

    fn check(&self) -> Result<()> {
        if self.algorithms.is_empty() || self.tol_grid.is_empty() || self.threaded.is_empty() {
            return Err(BenchError::Config("sweep needs algorithms, tolerances and threading variants".into()));
        }
        if self.repeats == 0 || self.workers == 0 {
            return Err(BenchError::Config("repeats and workers must be positive".into()));
        }
        for &(rel, abs) in &self.tol_grid {
            Tolerances::new(abs, rel)?;
        }
        Ok(())
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn options(named: &NamedProblem, alg: Algorithm, threaded: bool, workers: usize) -> SolverOptions {
    let opts = match named.orders_for(alg) {
        Some(_) => named.options_for(alg),
        None => SolverOptions::default(),
    };
    if threaded {
        opts.with_threading(Threading::On, workers)
    } else {
        opts.with_threading(Threading::Off, 1)
    }
}

/// Runs every configured point sequentially. Solver failures become failed
/// points; only an invalid configuration aborts the sweep.
pub fn run_sweep(named: &NamedProblem, reference: &ReferenceSolution, cfg: &SweepConfig) -> Result<Vec<WorkPrecisionPoint>> {
    cfg.check()?;
    if reference.state.len() != named.dim() {
        return Err(BenchError::Config(format!(
            "reference for {} has dimension {}, problem has {}",
            reference.problem,
            reference.state.len(),
            named.dim()
        )));
    }
    let mut points = Vec::new();
    for &alg in &cfg.algorithms {
        for &threaded in &cfg.threaded {
            let opts = options(named, alg, threaded, cfg.workers);
            for &(reltol, abstol) in &cfg.tol_grid {
                let tol = Tolerances::new(abstol, reltol)?;
                let run = || solve(&named.problem, alg, &opts, tol);
                for _ in 0..cfg.warmup {
                    let _ = run();
                }
                let mut times = Vec::with_capacity(cfg.repeats);
                let mut last: Option<parex::Result<Solution>> = None;
                for _ in 0..cfg.repeats {
                    let start = Instant::now();
                    let out = run();
                    times.push(start.elapsed().as_secs_f64());
                    last = Some(out);
                }
                let (error, stats) = match last.expect("at least one repeat") {
                    Ok(sol) if sol.retcode.is_success() => {
                        (error_metric(sol.final_state(), &reference.state, abstol), sol.stats)
                    }
                    Ok(sol) => (f64::INFINITY, sol.stats),
                    Err(_) => (f64::INFINITY, Default::default()),
                };
                points.push(WorkPrecisionPoint {
                    problem: named.name.to_string(),
                    algorithm: alg.id().to_string(),
                    threaded,
                    reltol,
                    abstol,
                    error,
                    runtime_s: median(times).max(f64::MIN_POSITIVE),
                    nf: stats.nf,
                    njac: stats.njac,
                    nlu: stats.nlu,
                    nsolve: stats.nsolve,
                    naccept: stats.naccept,
                    nreject: stats.nreject,
                });
            }
        }
    }
    Ok(points)
}

/// Series (algorithm, threading) whose error grows when reltol is tightened.
pub fn monotonicity_violations(points: &[WorkPrecisionPoint]) -> Vec<String> {
    let mut out = Vec::new();
    let mut series: Vec<(&str, bool)> = points.iter().map(|p| (p.algorithm.as_str(), p.threaded)).collect();
    series.dedup();
    for (alg, threaded) in series {
        let mut pts: Vec<&WorkPrecisionPoint> = points
            .iter()
            .filter(|p| p.algorithm == alg && p.threaded == threaded && !p.failed())
            .collect();
        pts.sort_by(|a, b| b.reltol.total_cmp(&a.reltol));
        for w in pts.windows(2) {
            if w[1].error > w[0].error {
                out.push(format!(
                    "{alg} (threaded={threaded}): error {:e} at reltol {:e} exceeds {:e} at reltol {:e}",
                    w[1].error, w[1].reltol, w[0].error, w[0].reltol
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
