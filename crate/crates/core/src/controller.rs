//! Error estimation, step-size control and work-based order selection.

use crate::extrapolation::WorkModel;
use crate::ode::Tolerances;

/// Relative margin an order change must win by before it is taken.
pub const ORDER_SWITCH_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    pub safety: f64,
    pub q_min: f64,
    pub q_max: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            safety: 0.9,
            q_min: 0.2,
            q_max: 10.0,
        }
    }
}

/// Weighted RMS of `t_kk - t_k_km1`, each component scaled by
/// `abstol + reltol * max(|u_i|, |u_prev_i|)`. A value below one means the
/// step is within tolerance.
pub fn scaled_error(
    t_kk: &[f64],
    t_k_km1: &[f64],
    u: &[f64],
    u_prev: &[f64],
    tol: &Tolerances,
) -> f64 {
    let d = t_kk.len();
    assert!(t_k_km1.len() == d && u.len() == d && u_prev.len() == d);
    let sum: f64 = (0..d)
        .map(|i| {
            let scale = tol.abstol + u[i].abs().max(u_prev[i].abs()) * tol.reltol;
            ((t_kk[i] - t_k_km1[i]) / scale).powi(2)
        })
        .sum();
    let err = (sum / d as f64).sqrt();
    if err.is_nan() {
        f64::INFINITY
    } else {
        err
    }
}

/// Standard controller: `q = clamp(err^(1/(power·k + 1)) / γ, q_min, q_max)`
/// and `h_opt = h / q`.
pub fn optimal_step(h: f64, err_scaled: f64, k: usize, power: u32, params: &ControllerParams) -> f64 {
    let exponent = 1.0 / (power as f64 * k as f64 + 1.0);
    let raw = err_scaled.powf(exponent) / params.safety;
    // NaN falls through to the maximum shrink
    let q = if raw.is_nan() {
        params.q_max
    } else {
        raw.min(params.q_max).max(params.q_min)
    };
    h / q
}

/// Error and proposed step of one order evaluated during a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub order: usize,
    pub err: f64,
    pub h_opt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub accept: bool,
    pub next_h: f64,
    pub next_order: usize,
}

/// Chooses whether to accept and the order and step for the next attempt.
///
/// The step is accepted when the current order, or the probed order above
/// it, is within tolerance. On acceptance the next order minimizes the work
/// rate `A_k / h_opt(k)` over the available estimates in
/// `{current - 1, current, current + 1} ∩ [min_order, max_order]`; ties keep
/// the current order. On rejection the order is kept and the step shrunk.
pub fn select_order(
    estimates: &[OrderEstimate],
    work: &WorkModel,
    current: usize,
    min_order: usize,
    max_order: usize,
) -> StepDecision {
    let find = |k: usize| estimates.iter().find(|e| e.order == k);
    let cur = find(current).expect("estimate for the current order is required");
    let within = |e: &OrderEstimate| e.err < 1.0;
    let accept = within(cur) || find(current + 1).is_some_and(within);
    if !accept {
        return StepDecision {
            accept: false,
            next_h: cur.h_opt,
            next_order: current,
        };
    }

    let rate = |e: &OrderEstimate| work.stage_count(e.order) / e.h_opt;
    let mut best = *cur;
    let mut best_rate = rate(cur);
    for e in estimates {
        let in_window = e.order + 1 >= current
            && e.order <= current + 1
            && e.order >= min_order
            && e.order <= max_order
            && e.order <= work.max_order();
        if !in_window || e.order == current {
            continue;
        }
        let r = rate(e);
        if r < best_rate * (1.0 - ORDER_SWITCH_MARGIN) {
            best = *e;
            best_rate = r;
        }
    }
    StepDecision {
        accept: true,
        next_h: best.h_opt,
        next_order: best.order,
    }
}
