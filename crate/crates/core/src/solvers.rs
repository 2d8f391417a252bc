//! Adaptive and fixed-step extrapolation solvers.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::controller::{optimal_step, scaled_error, select_order, ControllerParams, OrderEstimate};
use crate::error::{Error, Result};
use crate::extrapolation::{aitken_neville, BarycentricTableau, SequenceKind, SubdividingSequence, WorkModel, WorkWeights};
use crate::linalg::{finite_diff_jacobian_into, DenseMatrix};
use crate::ode::{validate, OdeProblem, RetCode, Solution, SolverOptions, Stats, StepRecord, Threading, Tolerances};
use crate::scheduler::{build_schedule, StaticSchedule, WorkerPool};
use crate::steppers::{explicit_midpoint_row, implicit_row, BaseMethod, RowResult};

/// Consecutive failed row evaluations (singular iteration matrix or
/// non-finite state) tolerated before giving up.
const MAX_CONSECUTIVE_ROW_FAILURES: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolator {
    AitkenNeville,
    Barycentric,
}

/// The public algorithm families. Each fixes the base method, the
/// extrapolation scheme, the expansion power and the sequence multiple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    MidpointDeuflhard,
    MidpointHairerWanner,
    ImplicitEuler,
    ImplicitEulerBarycentric,
    ImplicitHairerWanner,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::MidpointDeuflhard,
        Algorithm::MidpointHairerWanner,
        Algorithm::ImplicitEuler,
        Algorithm::ImplicitEulerBarycentric,
        Algorithm::ImplicitHairerWanner,
    ];

    pub const IMPLICIT: [Algorithm; 3] = [
        Algorithm::ImplicitEuler,
        Algorithm::ImplicitEulerBarycentric,
        Algorithm::ImplicitHairerWanner,
    ];

    pub fn base_method(self) -> BaseMethod {
        match self {
            Algorithm::MidpointDeuflhard | Algorithm::MidpointHairerWanner => BaseMethod::ExplicitMidpoint,
            Algorithm::ImplicitEuler | Algorithm::ImplicitEulerBarycentric => BaseMethod::LinearlyImplicitEuler,
            Algorithm::ImplicitHairerWanner => BaseMethod::SmoothedImplicitMidpoint,
        }
    }

    pub fn extrapolator(self) -> Extrapolator {
        match self {
            Algorithm::ImplicitEuler => Extrapolator::AitkenNeville,
            _ => Extrapolator::Barycentric,
        }
    }

    pub fn power(self) -> u32 {
        self.base_method().power()
    }

    pub fn sequence_multiple(self) -> usize {
        self.base_method().sequence_multiple()
    }

    pub fn is_explicit(self) -> bool {
        !self.base_method().is_implicit()
    }

    /// Whether row `k + 1` is computed together with rows `1..=k` on every
    /// attempt, rather than only after order `k` converged.
    pub fn eager_probe(self) -> bool {
        matches!(self, Algorithm::MidpointDeuflhard)
    }

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::MidpointDeuflhard => "midpoint_deuflhard",
            Algorithm::MidpointHairerWanner => "midpoint_hairer_wanner",
            Algorithm::ImplicitEuler => "implicit_euler",
            Algorithm::ImplicitEulerBarycentric => "implicit_euler_barycentric",
            Algorithm::ImplicitHairerWanner => "implicit_hairer_wanner",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

/// Per-solve precomputed data: sequence, tableau, work model, schedules.
struct Tableaus {
    alg: Algorithm,
    seq: Vec<usize>,
    barycentric: Option<BarycentricTableau>,
}

impl Tableaus {
    fn new(alg: Algorithm, kind: SequenceKind, max_order: usize) -> Self {
        let seq = SubdividingSequence::new(kind, alg.sequence_multiple()).values(max_order + 1);
        let barycentric = (alg.extrapolator() == Extrapolator::Barycentric)
            .then(|| BarycentricTableau::new(&seq, alg.power(), max_order));
        Self { alg, seq, barycentric }
    }

    /// `(T_{m,m}, T_{m,m-1})` from the first `m` rows.
    fn extrapolate(&self, column: &[Vec<f64>], m: usize) -> (Vec<f64>, Vec<f64>) {
        match &self.barycentric {
            None => aitken_neville(&column[..m], &self.seq, self.alg.power()),
            Some(tab) => {
                let d = column[0].len();
                let mut top = vec![0.0; d];
                tab.extrapolate_into(m, column, &mut top);
                let sub = if m > 1 {
                    let mut s = vec![0.0; d];
                    tab.extrapolate_into(m - 1, column, &mut s);
                    s
                } else {
                    top.clone()
                };
                (top, sub)
            }
        }
    }
}

struct RowEngine<'a> {
    problem: &'a OdeProblem,
    method: BaseMethod,
    seq: &'a [usize],
}

impl RowEngine<'_> {
    fn row(&self, j: usize, u: &[f64], t: f64, h: f64, jac: Option<&DenseMatrix>) -> Result<RowResult> {
        let n = self.seq[j];
        let rhs = self.problem.rhs_fn();
        let p = &self.problem.params;
        match (self.method, jac) {
            (BaseMethod::ExplicitMidpoint, _) => explicit_midpoint_row(rhs, u, p, t, h, n),
            (method, Some(jac)) => implicit_row(method, rhs, jac, u, p, t, h, n),
            (_, None) => Err(Error::Config("implicit row without a Jacobian".into())),
        }
    }
}

fn evaluate_jacobian(problem: &OdeProblem, u: &[f64], t: f64, jac: &mut DenseMatrix, stats: &mut Stats) -> Result<()> {
    stats.njac += 1;
    match problem.jacobian_fn() {
        Some(jf) => {
            jf(jac, u, &problem.params, t);
            if jac.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFiniteRhs)
            }
        }
        None => {
            stats.nf += problem.dim() as u64 + 1;
            let rhs = problem.rhs_fn();
            finite_diff_jacobian_into(|du, u, p, t| rhs(du, u, p, t), u, &problem.params, t, jac)
        }
    }
}

fn tally(stats: &mut Stats, rows: &[Result<RowResult>]) {
    for r in rows.iter().flatten() {
        stats.nf += r.rhs_calls as u64;
        stats.nsolve += r.solves as u64;
        stats.nlu += r.factorizations as u64;
    }
}

/// Integrates `problem` over its time span with adaptive step size and order.
///
/// Failures during integration are reported through [`Solution::retcode`];
/// only an invalid configuration is returned as an error.
pub fn solve(problem: &OdeProblem, alg: Algorithm, opts: &SolverOptions, tol: Tolerances) -> Result<Solution> {
    validate(problem, alg, opts, &tol)?;
    let wants_pool = match opts.threading {
        Threading::Off => false,
        Threading::On => true,
        Threading::Auto => problem.dim() >= 10,
    };
    let pool = if wants_pool { WorkerPool::new(opts.num_workers) } else { WorkerPool::serial() };
    solve_validated(problem, alg, opts, tol, &pool)
}

/// [`solve`] on a caller-provided worker pool.
pub fn solve_with_pool(
    problem: &OdeProblem,
    alg: Algorithm,
    opts: &SolverOptions,
    tol: Tolerances,
    pool: &WorkerPool,
) -> Result<Solution> {
    validate(problem, alg, opts, &tol)?;
    solve_validated(problem, alg, opts, tol, pool)
}

fn solve_validated(
    problem: &OdeProblem,
    alg: Algorithm,
    opts: &SolverOptions,
    tol: Tolerances,
    pool: &WorkerPool,
) -> Result<Solution> {
    let d = problem.dim();
    let (t0, tf) = problem.tspan;
    let method = alg.base_method();
    let tabs = Tableaus::new(alg, opts.sequence, opts.max_order);
    let work = WorkModel::new(
        method,
        SubdividingSequence::new(opts.sequence, alg.sequence_multiple()),
        opts.max_order,
        WorkWeights::for_dim(d),
    );
    let params = ControllerParams {
        safety: opts.safety,
        q_min: opts.q_min,
        q_max: opts.q_max,
    };
    let engine = RowEngine {
        problem,
        method,
        seq: &tabs.seq,
    };
    let mut schedules: HashMap<usize, StaticSchedule> = HashMap::new();

    let mut stats = Stats::default();
    let mut ts = vec![t0];
    let mut us = vec![problem.u0.clone()];
    let mut steps = Vec::new();
    let mut u = problem.u0.clone();
    let mut t = t0;
    let mut h = opts.dt_init.unwrap_or(1e-6 * (tf - t0));
    let mut k = opts.init_order;
    let mut jac = DenseMatrix::zeros(d);
    let mut jac_at: Option<f64> = None;
    let mut row_failures = 0usize;
    let mut retcode = RetCode::Success;

    while t < tf {
        if (stats.naccept + stats.nreject) as usize >= opts.max_steps {
            retcode = RetCode::MaxStepsExceeded;
            break;
        }
        let last = t + h >= tf;
        if last {
            h = tf - t;
        }
        if !(h > 0.0) || h < 1e3 * f64::EPSILON * t.abs() {
            retcode = RetCode::StepUnderflow;
            break;
        }

        if method.is_implicit() && jac_at != Some(t) {
            if evaluate_jacobian(problem, &u, t, &mut jac, &mut stats).is_err() {
                retcode = RetCode::SingularFailure;
                break;
            }
            jac_at = Some(t);
        }
        let jac_ref = method.is_implicit().then_some(&jac);

        let rows_now = if alg.eager_probe() && k < opts.max_order { k + 1 } else { k };
        let schedule = schedules
            .entry(rows_now)
            .or_insert_with(|| build_schedule(&tabs.seq, rows_now, pool.num_workers()));
        let results: Vec<Result<RowResult>> = if opts.threading.enabled_for(rows_now, d) {
            pool.run_rows(schedule, |j| Ok(engine.row(j, &u, t, h, jac_ref)))?
        } else {
            (0..rows_now).map(|j| engine.row(j, &u, t, h, jac_ref)).collect()
        };
        tally(&mut stats, &results);
        let mut column: Vec<Vec<f64>> = Vec::with_capacity(rows_now + 1);
        let mut failure = None;
        for r in results {
            match r {
                Ok(row) => column.push(row.value),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }

        let mut record = StepRecord {
            t,
            h,
            rows: rows_now,
            order: k,
            accepted: false,
        };
        if failure.is_some() {
            stats.nreject += 1;
            steps.push(record);
            row_failures += 1;
            if row_failures > MAX_CONSECUTIVE_ROW_FAILURES {
                retcode = match failure {
                    Some(Error::SingularMatrix { .. }) => RetCode::SingularFailure,
                    _ => RetCode::StepUnderflow,
                };
                break;
            }
            h *= 0.5;
            continue;
        }
        row_failures = 0;

        let lowest = opts.min_order.max(2);
        let estimate = |column: &[Vec<f64>], m: usize| {
            let (top, sub) = tabs.extrapolate(column, m);
            let err = scaled_error(&top, &sub, &top, &u, &tol);
            let est = OrderEstimate {
                order: m,
                err,
                h_opt: optimal_step(h, err, m, alg.power(), &params),
            };
            (est, top)
        };
        let mut estimates = Vec::with_capacity(3);
        let mut values: Vec<(usize, Vec<f64>)> = Vec::with_capacity(3);
        for m in [k - 1, k] {
            if m >= lowest {
                let (e, v) = estimate(&column, m);
                estimates.push(e);
                values.push((m, v));
            }
        }
        let converged = estimates.last().is_some_and(|e| e.err < 1.0);
        if column.len() == k && converged && k < opts.max_order {
            let extra = engine.row(k, &u, t, h, jac_ref);
            tally(&mut stats, std::slice::from_ref(&extra));
            record.rows += 1;
            if let Ok(row) = extra {
                column.push(row.value);
            }
        }
        if column.len() > k {
            let (e, v) = estimate(&column, k + 1);
            estimates.push(e);
            values.push((k + 1, v));
        }

        let decision = select_order(&estimates, &work, k, opts.min_order, opts.max_order);
        if decision.accept {
            let higher_ok = estimates.iter().any(|e| e.order == k + 1 && e.err < 1.0);
            let take = if higher_ok { k + 1 } else { k };
            let (_, value) = values
                .into_iter()
                .find(|(m, _)| *m == take)
                .expect("accepted order has a value");
            t = if last { tf } else { t + h };
            u = value;
            ts.push(t);
            us.push(u.clone());
            stats.naccept += 1;
            record.accepted = true;
        } else {
            stats.nreject += 1;
        }
        steps.push(record);
        h = decision.next_h;
        k = decision.next_order;
    }

    Ok(Solution {
        ts,
        us,
        stats,
        retcode,
        steps,
    })
}

/// Fixed step `dt`, fixed `k` rows, one extrapolation per step.
///
/// `dt` must divide `tf - t0` (to a relative 1e-9).
pub fn solve_fixed(problem: &OdeProblem, alg: Algorithm, k: usize, dt: f64) -> Result<Solution> {
    let (t0, tf) = problem.tspan;
    if !(tf > t0) || !(dt > 0.0) || k == 0 {
        return Err(Error::Config("fixed-step solve needs t0 < tf, dt > 0 and k >= 1".into()));
    }
    let nsteps_f = (tf - t0) / dt;
    let nsteps = nsteps_f.round();
    if nsteps < 1.0 || (nsteps - nsteps_f).abs() > 1e-9 * nsteps {
        return Err(Error::Config(format!("dt = {dt} does not divide the time span")));
    }
    let nsteps = nsteps as usize;
    let method = alg.base_method();
    let tabs = Tableaus::new(alg, SequenceKind::Harmonic, k);
    let engine = RowEngine {
        problem,
        method,
        seq: &tabs.seq,
    };
    let d = problem.dim();
    let mut stats = Stats::default();
    let mut jac = DenseMatrix::zeros(d);
    let mut u = problem.u0.clone();
    let mut ts = vec![t0];
    let mut us = vec![u.clone()];
    let mut steps = Vec::with_capacity(nsteps);
    let mut retcode = RetCode::Success;

    for i in 0..nsteps {
        let t = t0 + i as f64 * dt;
        if method.is_implicit() && evaluate_jacobian(problem, &u, t, &mut jac, &mut stats).is_err() {
            retcode = RetCode::SingularFailure;
            break;
        }
        let jac_ref = method.is_implicit().then_some(&jac);
        let rows: Vec<Result<RowResult>> = (0..k).map(|j| engine.row(j, &u, t, dt, jac_ref)).collect();
        tally(&mut stats, &rows);
        let column: Result<Vec<Vec<f64>>> = rows.into_iter().map(|r| r.map(|r| r.value)).collect();
        let column = match column {
            Ok(c) => c,
            Err(Error::SingularMatrix { .. }) => {
                retcode = RetCode::SingularFailure;
                break;
            }
            Err(_) => {
                retcode = RetCode::StepUnderflow;
                break;
            }
        };
        u = tabs.extrapolate(&column, k).0;
        let t_next = if i + 1 == nsteps { tf } else { t0 + (i + 1) as f64 * dt };
        ts.push(t_next);
        us.push(u.clone());
        stats.naccept += 1;
        steps.push(StepRecord {
            t,
            h: dt,
            rows: k,
            order: k,
            accepted: true,
        });
    }
    Ok(Solution {
        ts,
        us,
        stats,
        retcode,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> OdeProblem {
        OdeProblem::new(|du, u, _p, _t| du[0] = -u[0], vec![1.0], (0.0, 1.0))
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.id().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }

    #[test]
    fn zero_rhs_keeps_initial_state() {
        let p = OdeProblem::new(|du, _u, _p, _t| du.fill(0.0), vec![1.5, -2.0], (0.0, 3.0));
        let tol = Tolerances::new(1e-8, 1e-8).unwrap();
        for alg in Algorithm::ALL {
            let sol = solve(&p, alg, &SolverOptions::default(), tol).unwrap();
            assert_eq!(sol.retcode, RetCode::Success);
            assert_eq!(sol.final_state(), &[1.5, -2.0]);
            assert_eq!(sol.final_time(), 3.0);
        }
    }

    #[test]
    fn decay_is_accurate_for_every_family() {
        let tol = Tolerances::new(1e-10, 1e-10).unwrap();
        for alg in Algorithm::ALL {
            let sol = solve(&decay(), alg, &SolverOptions::default(), tol).unwrap();
            assert!(sol.retcode.is_success(), "{alg}: {}", sol.retcode);
            let err = (sol.final_state()[0] - (-1.0f64).exp()).abs();
            assert!(err < 1e-8, "{alg}: error {err}");
        }
    }

    #[test]
    fn counters_match_the_step_log() {
        let tol = Tolerances::new(1e-8, 1e-8).unwrap();
        for alg in Algorithm::ALL {
            let sol = solve(&decay(), alg, &SolverOptions::default(), tol).unwrap();
            let accepted = sol.steps.iter().filter(|s| s.accepted).count() as u64;
            assert_eq!(accepted, sol.stats.naccept);
            assert_eq!(sol.steps.len() as u64, sol.stats.naccept + sol.stats.nreject);
            assert_eq!(sol.ts.len() as u64, sol.stats.naccept + 1);
            let seq = SubdividingSequence::new(SequenceKind::Harmonic, alg.sequence_multiple()).values(20);
            let method = alg.base_method();
            let rhs: u64 = sol
                .steps
                .iter()
                .flat_map(|s| seq[..s.rows].iter().map(move |&n| method.rhs_calls(n) as u64))
                .sum();
            // finite-difference Jacobians add d + 1 = 2 evaluations each
            assert_eq!(sol.stats.nf, rhs + 2 * sol.stats.njac, "{alg}");
            if method.is_implicit() {
                let solves: u64 = sol
                    .steps
                    .iter()
                    .flat_map(|s| seq[..s.rows].iter().map(move |&n| method.solves(n) as u64))
                    .sum();
                assert_eq!(sol.stats.nsolve, solves);
                let rows: u64 = sol.steps.iter().map(|s| s.rows as u64).sum();
                assert_eq!(sol.stats.nlu, rows);
            } else {
                assert_eq!(sol.stats.njac + sol.stats.nlu + sol.stats.nsolve, 0);
            }
        }
    }

    #[test]
    fn last_step_lands_on_final_time() {
        let p = OdeProblem::new(|du, u, _p, _t| du[0] = -u[0], vec![1.0], (0.3, 1.7));
        let tol = Tolerances::new(1e-6, 1e-6).unwrap();
        let sol = solve(&p, Algorithm::ImplicitHairerWanner, &SolverOptions::default(), tol).unwrap();
        assert_eq!(sol.final_time(), 1.7);
        assert!(sol.ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn max_steps_is_reported() {
        let opts = SolverOptions {
            max_steps: 3,
            ..SolverOptions::default()
        };
        let tol = Tolerances::new(1e-12, 1e-12).unwrap();
        let sol = solve(&decay(), Algorithm::ImplicitEuler, &opts, tol).unwrap();
        assert_eq!(sol.retcode, RetCode::MaxStepsExceeded);
        assert_eq!(sol.stats.naccept + sol.stats.nreject, 3);
    }

    #[test]
    fn blow_up_underflows() {
        // u' = u², u(0) = 1 blows up at t = 1
        let p = OdeProblem::new(|du, u, _p, _t| du[0] = u[0] * u[0], vec![1.0], (0.0, 2.0));
        let tol = Tolerances::new(1e-8, 1e-8).unwrap();
        let sol = solve(&p, Algorithm::MidpointHairerWanner, &SolverOptions::default(), tol).unwrap();
        assert_eq!(sol.retcode, RetCode::StepUnderflow);
        assert!((sol.final_time() - 1.0).abs() < 1e-9);
        assert!(sol.final_state()[0] > 1e8);
    }

    #[test]
    fn invalid_options_are_config_errors() {
        let tol = Tolerances::new(1e-8, 1e-8).unwrap();
        let opts = SolverOptions::default().with_orders(1, 5, 10);
        assert!(matches!(solve(&decay(), Algorithm::ImplicitEuler, &opts, tol), Err(Error::Config(_))));
    }

    #[test]
    fn fixed_step_requires_dividing_dt() {
        assert!(solve_fixed(&decay(), Algorithm::ImplicitEuler, 3, 0.3).is_err());
        let sol = solve_fixed(&decay(), Algorithm::ImplicitEuler, 3, 0.25).unwrap();
        assert_eq!(sol.stats.naccept, 4);
        assert_eq!(sol.final_time(), 1.0);
    }

    #[test]
    fn threaded_solve_matches_serial_bitwise() {
        let p = OdeProblem::new(
            |du, u, _p, _t| {
                for i in 0..u.len() {
                    du[i] = -(i as f64 + 1.0) * u[i] + 0.1 * u[(i + 1) % u.len()];
                }
            },
            vec![1.0; 12],
            (0.0, 2.0),
        );
        let tol = Tolerances::new(1e-9, 1e-9).unwrap();
        for alg in Algorithm::ALL {
            let serial = solve(&p, alg, &SolverOptions::default().with_threading(Threading::Off, 1), tol).unwrap();
            for w in [2, 3, 4] {
                let threaded = solve(&p, alg, &SolverOptions::default().with_threading(Threading::On, w), tol).unwrap();
                assert_eq!(serial.us, threaded.us, "{alg} with {w} workers");
                assert_eq!(serial.stats, threaded.stats);
            }
        }
    }
}
