//! Reference solutions from two cross-checked solver families.

use parex::problems::NamedProblem;
use parex::{solve, Algorithm, SolverOptions, Threading, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const REFERENCE_RELTOL: f64 = 1e-12;
pub const REFERENCE_ABSTOL: f64 = 1e-14;
/// Largest accepted [`error_metric`] between the two reference solves.
pub const REFERENCE_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub problem: String,
    pub t_final: f64,
    pub state: Vec<f64>,
    /// Algorithm and tolerances that produced `state`.
    pub generator: String,
    /// Metric distance to the cross-check solve.
    pub cross_check: f64,
}

/// Relative l2 error of `state` against `reference`; components with
/// `|reference_i| <= abstol` contribute their absolute error instead.
pub fn error_metric(state: &[f64], reference: &[f64], abstol: f64) -> f64 {
    assert_eq!(state.len(), reference.len());
    state
        .iter()
        .zip(reference)
        .map(|(&s, &r)| {
            let e = s - r;
            if r.abs() > abstol {
                (e / r).powi(2)
            } else {
                e * e
            }
        })
        .sum::<f64>()
        .sqrt()
}

fn reference_solve(named: &NamedProblem, alg: Algorithm) -> Result<Vec<f64>> {
    let mut opts = named.options_for(alg);
    if named.orders_for(alg).is_none() {
        opts = SolverOptions::default();
    }
    opts.threading = Threading::Off;
    opts.max_steps = 10_000_000;
    let tol = Tolerances::new(REFERENCE_ABSTOL, REFERENCE_RELTOL)?;
    let sol = solve(&named.problem, alg, &opts, tol)?;
    if !sol.retcode.is_success() {
        return Err(BenchError::ReferenceFailed {
            problem: named.name.to_string(),
            algorithm: alg.id().to_string(),
            retcode: sol.retcode.to_string(),
        });
    }
    Ok(sol.final_state().to_vec())
}

/// Solves with the smoothed implicit midpoint family and cross-checks the
/// result against implicit Euler at the same tolerance.
pub fn make_reference(named: &NamedProblem) -> Result<ReferenceSolution> {
    let primary = Algorithm::ImplicitHairerWanner;
    let state = reference_solve(named, primary)?;
    let check = reference_solve(named, Algorithm::ImplicitEuler)?;
    let cross_check = error_metric(&check, &state, REFERENCE_ABSTOL);
    if !(cross_check <= REFERENCE_AGREEMENT) {
        return Err(BenchError::ReferenceDisagreement {
            problem: named.name.to_string(),
            difference: cross_check,
            limit: REFERENCE_AGREEMENT,
        });
    }
    Ok(ReferenceSolution {
        problem: named.name.to_string(),
        t_final: named.problem.tspan.1,
        state,
        generator: format!("{} reltol={REFERENCE_RELTOL:e} abstol={REFERENCE_ABSTOL:e}", primary.id()),
        cross_check,
    })
}
