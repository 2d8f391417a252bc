//! Stiff benchmark problems with their tolerance grids and tuned order windows.
//!
//! Right-hand sides read their rate constants from `params`, so a problem can
//! be re-parameterized with [`OdeProblem::with_params`]. Jacobians default to
//! finite differences; [`NamedProblem::with_analytic_jacobian`] attaches the
//! hand-derived one where available.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::DenseMatrix;
use crate::ode::{OdeProblem, SolverOptions};
use crate::solvers::Algorithm;

/// `(min, init, max)` order window.
pub type OrderWindow = (usize, usize, usize);

#[derive(Debug, Clone)]
pub struct NamedProblem {
    pub name: &'static str,
    pub problem: OdeProblem,
    /// `(reltol, abstol)` pairs, loosest first.
    pub default_tol_grid: Vec<(f64, f64)>,
    pub tuned_orders: Vec<(Algorithm, OrderWindow)>,
}

impl NamedProblem {
    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn orders_for(&self, alg: Algorithm) -> Option<OrderWindow> {
        self.tuned_orders.iter().find(|(a, _)| *a == alg).map(|&(_, w)| w)
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        self.tuned_orders.iter().map(|&(a, _)| a).collect()
    }

    /// Default options with the tuned order window of `alg`, if it has one.
    pub fn options_for(&self, alg: Algorithm) -> SolverOptions {
        let opts = SolverOptions::default();
        match self.orders_for(alg) {
            Some((min, init, max)) => opts.with_orders(min, init, max),
            None => opts,
        }
    }

    /// Replaces the finite-difference Jacobian by the analytic one. POLLU has
    /// no analytic Jacobian and is returned unchanged.
    pub fn with_analytic_jacobian(mut self) -> Self {
        self.problem = match self.name {
            "rober" => self.problem.with_jacobian(rober_jacobian),
            "orego" => self.problem.with_jacobian(orego_jacobian),
            "hires" => self.problem.with_jacobian(hires_jacobian),
            "linear_100" => self.problem.with_jacobian(linear_jacobian),
            _ => self.problem,
        };
        self
    }
}

fn decade_grid(rel: &[f64], abs: &[f64]) -> Vec<(f64, f64)> {
    rel.iter().copied().zip(abs.iter().copied()).collect()
}

fn implicit_orders(ie: OrderWindow, ieb: OrderWindow, ihw: OrderWindow) -> Vec<(Algorithm, OrderWindow)> {
    vec![
        (Algorithm::ImplicitEuler, ie),
        (Algorithm::ImplicitEulerBarycentric, ieb),
        (Algorithm::ImplicitHairerWanner, ihw),
    ]
}

fn rober_rhs(du: &mut [f64], u: &[f64], k: &[f64], _t: f64) {
    let (y1, y2, y3) = (u[0], u[1], u[2]);
    du[0] = -k[0] * y1 + k[2] * y2 * y3;
    du[1] = k[0] * y1 - k[1] * y2 * y2 - k[2] * y2 * y3;
    du[2] = k[1] * y2 * y2;
}

pub fn rober_jacobian(j: &mut DenseMatrix, u: &[f64], k: &[f64], _t: f64) {
    let (y2, y3) = (u[1], u[2]);
    j.fill(0.0);
    j[(0, 0)] = -k[0];
    j[(0, 1)] = k[2] * y3;
    j[(0, 2)] = k[2] * y2;
    j[(1, 0)] = k[0];
    j[(1, 1)] = -2.0 * k[1] * y2 - k[2] * y3;
    j[(1, 2)] = -k[2] * y2;
    j[(2, 1)] = 2.0 * k[1] * y2;
}

/// Robertson's chemical kinetics, three species, `t ∈ (0, 1e5)`.
pub fn rober() -> NamedProblem {
    let problem = OdeProblem::new(rober_rhs, vec![1.0, 0.0, 0.0], (0.0, 1e5)).with_params(vec![0.04, 3e7, 1e4]);
    NamedProblem {
        name: "rober",
        problem,
        default_tol_grid: decade_grid(&[1e-7, 1e-8, 1e-9], &[1e-10, 1e-11, 1e-12]),
        tuned_orders: implicit_orders((3, 5, 12), (4, 5, 12), (2, 5, 10)),
    }
}

fn orego_rhs(du: &mut [f64], u: &[f64], k: &[f64], _t: f64) {
    let (y1, y2, y3) = (u[0], u[1], u[2]);
    du[0] = k[0] * (y2 + y1 * (1.0 - k[1] * y1 - y2));
    du[1] = (y3 - (1.0 + y1) * y2) / k[0];
    du[2] = k[2] * (y1 - y3);
}

pub fn orego_jacobian(j: &mut DenseMatrix, u: &[f64], k: &[f64], _t: f64) {
    let (y1, y2) = (u[0], u[1]);
    j.fill(0.0);
    j[(0, 0)] = k[0] * (1.0 - 2.0 * k[1] * y1 - y2);
    j[(0, 1)] = k[0] * (1.0 - y1);
    j[(1, 0)] = -y2 / k[0];
    j[(1, 1)] = -(1.0 + y1) / k[0];
    j[(1, 2)] = 1.0 / k[0];
    j[(2, 0)] = k[2];
    j[(2, 2)] = -k[2];
}

/// The Oregonator, a stiff oscillating reaction, `t ∈ (0, 30)`.
pub fn orego() -> NamedProblem {
    let problem = OdeProblem::new(orego_rhs, vec![1.0, 2.0, 3.0], (0.0, 30.0)).with_params(vec![77.27, 8.375e-6, 0.161]);
    NamedProblem {
        name: "orego",
        problem,
        default_tol_grid: decade_grid(&[1e-7, 1e-8, 1e-9], &[1e-10, 1e-11, 1e-12]),
        tuned_orders: implicit_orders((3, 4, 12), (3, 4, 12), (2, 5, 10)),
    }
}

fn hires_rhs(du: &mut [f64], y: &[f64], _p: &[f64], _t: f64) {
    let r = 280.0 * y[5] * y[7];
    du[0] = -1.71 * y[0] + 0.43 * y[1] + 8.32 * y[2] + 0.0007;
    du[1] = 1.71 * y[0] - 8.75 * y[1];
    du[2] = -10.03 * y[2] + 0.43 * y[3] + 0.035 * y[4];
    du[3] = 8.32 * y[1] + 1.71 * y[2] - 1.12 * y[3];
    du[4] = -1.745 * y[4] + 0.43 * y[5] + 0.43 * y[6];
    du[5] = -r + 0.69 * y[3] + 1.71 * y[4] - 0.43 * y[5] + 0.69 * y[6];
    du[6] = r - 1.81 * y[6];
    du[7] = -r + 1.81 * y[6];
}

pub fn hires_jacobian(j: &mut DenseMatrix, y: &[f64], _p: &[f64], _t: f64) {
    j.fill(0.0);
    j[(0, 0)] = -1.71;
    j[(0, 1)] = 0.43;
    j[(0, 2)] = 8.32;
    j[(1, 0)] = 1.71;
    j[(1, 1)] = -8.75;
    j[(2, 2)] = -10.03;
    j[(2, 3)] = 0.43;
    j[(2, 4)] = 0.035;
    j[(3, 1)] = 8.32;
    j[(3, 2)] = 1.71;
    j[(3, 3)] = -1.12;
    j[(4, 4)] = -1.745;
    j[(4, 5)] = 0.43;
    j[(4, 6)] = 0.43;
    j[(5, 3)] = 0.69;
    j[(5, 4)] = 1.71;
    j[(5, 5)] = -280.0 * y[7] - 0.43;
    j[(5, 6)] = 0.69;
    j[(5, 7)] = -280.0 * y[5];
    j[(6, 5)] = 280.0 * y[7];
    j[(6, 6)] = -1.81;
    j[(6, 7)] = 280.0 * y[5];
    j[(7, 5)] = -280.0 * y[7];
    j[(7, 6)] = 1.81;
    j[(7, 7)] = -280.0 * y[5];
}

/// High irradiance response of plant morphogenesis, eight species.
pub fn hires() -> NamedProblem {
    let u0 = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0057];
    NamedProblem {
        name: "hires",
        problem: OdeProblem::new(hires_rhs, u0, (0.0, 321.8122)),
        default_tol_grid: decade_grid(&[1e-7, 1e-8, 1e-9], &[1e-10, 1e-11, 1e-12]),
        tuned_orders: implicit_orders((4, 7, 12), (4, 7, 12), (3, 6, 10)),
    }
}

pub const POLLU_RATES: [f64; 25] = [
    0.35, 26.6, 12300.0, 0.00086, 0.00082, 15000.0, 0.00013, 24000.0, 16500.0, 9000.0, 0.022, 12000.0, 1.88,
    16300.0, 4.8e6, 0.00035, 0.0175, 1.0e8, 4.44e11, 1240.0, 2.1, 5.78, 0.0474, 1780.0, 3.12,
];

fn pollu_rhs(du: &mut [f64], u: &[f64], k: &[f64], _t: f64) {
    // one-based names to keep the transcription readable
    let y = |i: usize| u[i - 1];
    let k = |i: usize| k[i - 1];
    du[0] = -k(1) * y(1) - k(10) * y(11) * y(1) - k(14) * y(1) * y(6) - k(23) * y(1) * y(4)
        - k(24) * y(19) * y(1)
        + k(2) * y(2) * y(4)
        + k(3) * y(5) * y(2)
        + k(9) * y(11) * y(2)
        + k(11) * y(13)
        + k(12) * y(10) * y(2)
        + k(22) * y(19)
        + k(25) * y(20);
    du[1] = -k(2) * y(2) * y(4) - k(3) * y(5) * y(2) - k(9) * y(11) * y(2) - k(12) * y(10) * y(2)
        + k(1) * y(1)
        + k(21) * y(19);
    du[2] = -k(15) * y(3) + k(1) * y(1) + k(17) * y(4) + k(19) * y(16) + k(22) * y(19);
    du[3] = -k(2) * y(2) * y(4) - k(16) * y(4) - k(17) * y(4) - k(23) * y(1) * y(4) + k(15) * y(3);
    du[4] = -k(3) * y(5) * y(2)
        + 2.0 * k(4) * y(7)
        + k(6) * y(7) * y(6)
        + k(7) * y(9)
        + k(13) * y(14)
        + k(20) * y(17) * y(6);
    du[5] = -k(6) * y(7) * y(6) - k(8) * y(9) * y(6) - k(14) * y(1) * y(6) - k(20) * y(17) * y(6)
        + k(3) * y(5) * y(2)
        + 2.0 * k(18) * y(16);
    du[6] = -k(4) * y(7) - k(5) * y(7) - k(6) * y(7) * y(6) + k(13) * y(14);
    du[7] = k(4) * y(7) + k(5) * y(7) + k(6) * y(7) * y(6) + k(7) * y(9);
    du[8] = -k(7) * y(9) - k(8) * y(9) * y(6);
    du[9] = -k(12) * y(10) * y(2) + k(7) * y(9) + k(9) * y(11) * y(2);
    du[10] = -k(9) * y(11) * y(2) - k(10) * y(11) * y(1) + k(8) * y(9) * y(6) + k(11) * y(13);
    du[11] = k(9) * y(11) * y(2);
    du[12] = -k(11) * y(13) + k(10) * y(11) * y(1);
    du[13] = -k(13) * y(14) + k(12) * y(10) * y(2);
    du[14] = k(14) * y(1) * y(6);
    du[15] = -k(18) * y(16) - k(19) * y(16) + k(16) * y(4);
    du[16] = -k(20) * y(17) * y(6);
    du[17] = k(20) * y(17) * y(6);
    du[18] = -k(21) * y(19) - k(22) * y(19) - k(24) * y(19) * y(1) + k(23) * y(1) * y(4) + k(25) * y(20);
    du[19] = -k(25) * y(20) + k(24) * y(19) * y(1);
}

/// Atmospheric pollution chemistry, twenty species, `t ∈ (0, 60)`.
pub fn pollu() -> NamedProblem {
    let mut u0 = vec![0.0; 20];
    u0[1] = 0.2;
    u0[3] = 0.04;
    u0[6] = 0.1;
    u0[7] = 0.3;
    u0[8] = 0.017;
    u0[16] = 0.007;
    NamedProblem {
        name: "pollu",
        problem: OdeProblem::new(pollu_rhs, u0, (0.0, 60.0)).with_params(POLLU_RATES.to_vec()),
        default_tol_grid: decade_grid(&[1e-8, 1e-9, 1e-10], &[1e-10, 10f64.powf(-11.5), 1e-13]),
        tuned_orders: implicit_orders((5, 6, 12), (5, 6, 12), (3, 6, 10)),
    }
}

fn linear_rhs(du: &mut [f64], u: &[f64], lambda: &[f64], _t: f64) {
    for i in 0..u.len() {
        du[i] = lambda[i] * u[i];
    }
}

pub fn linear_jacobian(j: &mut DenseMatrix, _u: &[f64], lambda: &[f64], _t: f64) {
    j.fill(0.0);
    for (i, &l) in lambda.iter().enumerate() {
        j[(i, i)] = l;
    }
}

/// One hundred decoupled scalar equations `u_i' = λ_i u_i` with `λ_i` drawn
/// uniformly from `[-1, 0)`; `u(0) = 1`, `t ∈ (0, 1)`.
pub fn linear_100(seed: u64) -> NamedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // x ∈ [0, 1) maps onto λ = x - 1 ∈ [-1, 0)
    let lambda: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..1.0f64) - 1.0).collect();
    let problem = OdeProblem::new(linear_rhs, vec![1.0; 100], (0.0, 1.0)).with_params(lambda);
    NamedProblem {
        name: "linear_100",
        problem,
        default_tol_grid: decade_grid(
            &[1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12, 1e-13],
            &[1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15, 1e-16],
        ),
        tuned_orders: vec![
            (Algorithm::MidpointDeuflhard, (5, 10, 11)),
            (Algorithm::MidpointHairerWanner, (5, 10, 11)),
        ],
    }
}

/// Exact solution of a [`linear_100`] problem at time `t`.
pub fn linear_exact(problem: &OdeProblem, t: f64) -> Vec<f64> {
    problem
        .u0
        .iter()
        .zip(&problem.params)
        .map(|(&u0, &l)| u0 * (l * t).exp())
        .collect()
}

pub fn by_name(name: &str) -> Option<NamedProblem> {
    match name {
        "rober" => Some(rober()),
        "orego" => Some(orego()),
        "hires" => Some(hires()),
        "pollu" => Some(pollu()),
        "linear_100" => Some(linear_100(0)),
        _ => None,
    }
}

pub const NAMES: [&str; 5] = ["rober", "orego", "hires", "pollu", "linear_100"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::finite_diff_jacobian;

    fn eval(p: &NamedProblem, u: &[f64]) -> Vec<f64> {
        let mut du = vec![0.0; u.len()];
        p.problem.rhs(&mut du, u, 0.0);
        du
    }

    #[test]
    fn rober_examples() {
        let p = rober();
        assert_eq!(eval(&p, &[1.0, 0.0, 0.0]), vec![-0.04, 0.04, 0.0]);
        assert_eq!(eval(&p, &[0.0, 1.0, 0.0]), vec![0.0, -3e7, 3e7]);
        let du = eval(&p, &[0.3, 1e-4, 0.6]);
        assert!(du.iter().sum::<f64>().abs() < 1e-15 * du.iter().map(|x| x.abs()).sum::<f64>());
    }

    #[test]
    fn orego_examples() {
        let du = eval(&orego(), &[1.0, 2.0, 3.0]);
        assert!((du[2] + 0.322).abs() < 1e-15);
        assert!((du[1] + 1.0 / 77.27).abs() < 1e-15);
    }

    #[test]
    fn hires_examples() {
        let p = hires();
        let du = eval(&p, &p.problem.u0);
        assert!((du[0] + 1.7093).abs() < 1e-14);
        assert!((du[1] - 1.71).abs() < 1e-14);
    }

    #[test]
    fn pollu_examples() {
        let p = pollu();
        let du = eval(&p, &p.problem.u0);
        assert_eq!(du[11], 0.0);
        // k1·y1 and k21·y19 vanish, the k2·y2·y4 loss does not
        assert!((du[1] + 26.6 * 0.2 * 0.04).abs() < 1e-15);
        assert!((du[1] + 0.2128).abs() < 1e-14);
    }

    #[test]
    fn dimensions() {
        assert_eq!(rober().dim(), 3);
        assert_eq!(orego().dim(), 3);
        assert_eq!(hires().dim(), 8);
        assert_eq!(pollu().dim(), 20);
        assert_eq!(linear_100(1).dim(), 100);
    }

    #[test]
    fn tuned_orders_match_tables() {
        assert_eq!(rober().orders_for(Algorithm::ImplicitEuler), Some((3, 5, 12)));
        assert_eq!(rober().orders_for(Algorithm::ImplicitEulerBarycentric), Some((4, 5, 12)));
        assert_eq!(rober().orders_for(Algorithm::ImplicitHairerWanner), Some((2, 5, 10)));
        assert_eq!(orego().orders_for(Algorithm::ImplicitEuler), Some((3, 4, 12)));
        assert_eq!(orego().orders_for(Algorithm::ImplicitEulerBarycentric), Some((3, 4, 12)));
        assert_eq!(orego().orders_for(Algorithm::ImplicitHairerWanner), Some((2, 5, 10)));
        assert_eq!(hires().orders_for(Algorithm::ImplicitEuler), Some((4, 7, 12)));
        assert_eq!(hires().orders_for(Algorithm::ImplicitHairerWanner), Some((3, 6, 10)));
        assert_eq!(pollu().orders_for(Algorithm::ImplicitEulerBarycentric), Some((5, 6, 12)));
        assert_eq!(pollu().orders_for(Algorithm::ImplicitHairerWanner), Some((3, 6, 10)));
        assert_eq!(linear_100(0).orders_for(Algorithm::MidpointDeuflhard), Some((5, 10, 11)));
        assert_eq!(linear_100(0).orders_for(Algorithm::MidpointHairerWanner), Some((5, 10, 11)));
    }

    #[test]
    fn linear_is_reproducible() {
        let a = linear_100(42);
        let b = linear_100(42);
        assert_eq!(a.problem.params, b.problem.params);
        assert_ne!(a.problem.params, linear_100(43).problem.params);
        assert!(a.problem.params.iter().all(|&l| (-1.0..0.0).contains(&l)));
    }

    #[test]
    fn linear_exact_with_zero_rates_is_constant() {
        let p = linear_100(0).problem.with_params(vec![0.0; 100]);
        assert_eq!(linear_exact(&p, 0.7), p.u0);
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        for named in [rober(), orego(), hires(), linear_100(5)] {
            let named = named.with_analytic_jacobian();
            let pr = &named.problem;
            let d = pr.dim();
            // also probe away from u0 so state-dependent entries are exercised
            let shifted: Vec<f64> = pr.u0.iter().enumerate().map(|(i, x)| x + 0.01 * (i + 1) as f64).collect();
            for u in [pr.u0.clone(), shifted] {
                let mut exact = DenseMatrix::zeros(d);
                (pr.jacobian_fn().unwrap())(&mut exact, &u, &pr.params, 0.0);
                let rhs = pr.rhs_fn();
                let fd = finite_diff_jacobian(|du, u, p, t| rhs(du, u, p, t), &u, &pr.params, 0.0).unwrap();
                let scale = exact.frobenius_norm().max(1.0);
                for i in 0..d {
                    for j in 0..d {
                        let diff = (exact[(i, j)] - fd[(i, j)]).abs();
                        assert!(diff <= 1e-4 * scale, "{} J[{i},{j}]: {} vs {}", named.name, exact[(i, j)], fd[(i, j)]);
                    }
                }
            }
        }
    }
}
