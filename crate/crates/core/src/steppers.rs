//! Fixed-step base methods. Each call produces one first-column entry
//! `T_{j,1}` by crossing the interval `[t, t + dt]` in `n` substeps.

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, DenseMatrix, LuFactors};

/// The internal method run inside each table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseMethod {
    /// Two-step explicit midpoint rule with an explicit Euler start.
    ExplicitMidpoint,
    /// `u_{m+1} = u_m + (I - hJ)^{-1} h f(u_m)`.
    LinearlyImplicitEuler,
    /// Linearly-implicit midpoint rule followed by Gragg smoothing.
    SmoothedImplicitMidpoint,
}

impl BaseMethod {
    pub fn is_implicit(self) -> bool {
        !matches!(self, BaseMethod::ExplicitMidpoint)
    }

    /// Multiple applied to the subdividing sequence so every row has a
    /// substep count the method accepts.
    pub fn sequence_multiple(self) -> usize {
        match self {
            BaseMethod::ExplicitMidpoint => 2,
            BaseMethod::LinearlyImplicitEuler => 1,
            BaseMethod::SmoothedImplicitMidpoint => 4,
        }
    }

    /// Exponent of `h` in the error expansion.
    pub fn power(self) -> u32 {
        match self {
            BaseMethod::LinearlyImplicitEuler => 1,
            _ => 2,
        }
    }

    pub fn rhs_calls(self, n: usize) -> usize {
        match self {
            BaseMethod::SmoothedImplicitMidpoint => n + 1,
            _ => n,
        }
    }

    pub fn solves(self, n: usize) -> usize {
        match self {
            BaseMethod::ExplicitMidpoint => 0,
            BaseMethod::LinearlyImplicitEuler => n,
            BaseMethod::SmoothedImplicitMidpoint => n + 1,
        }
    }

    pub fn factorizations(self) -> usize {
        usize::from(self.is_implicit())
    }

    pub fn check_substeps(self, n: usize) -> Result<()> {
        let ok = match self {
            BaseMethod::ExplicitMidpoint => n >= 2 && n.is_multiple_of(2),
            BaseMethod::LinearlyImplicitEuler => n >= 1,
            BaseMethod::SmoothedImplicitMidpoint => n >= 4 && n.is_multiple_of(4),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{self:?} cannot take {n} substeps")))
        }
    }
}

/// Result of one table row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub value: Vec<f64>,
    pub rhs_calls: usize,
    pub solves: usize,
    pub factorizations: usize,
}

fn check_finite(v: &[f64], substeps: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { substeps })
    }
}

/// Two-step explicit midpoint rule; `n` must be even.
///
/// `u_1 = u_0 + h f(u_0)`, then `u_{m+1} = u_{m-1} + 2h f(u_m)`.
pub fn explicit_midpoint_row<F>(rhs: &F, u0: &[f64], p: &[f64], t: f64, dt: f64, n: usize) -> Result<RowResult>
where
    F: Fn(&mut [f64], &[f64], &[f64], f64) + ?Sized,
{
    BaseMethod::ExplicitMidpoint.check_substeps(n)?;
    let d = u0.len();
    let h = dt / n as f64;
    let mut f = vec![0.0; d];
    rhs(&mut f, u0, p, t);
    let mut prev = u0.to_vec();
    let mut cur: Vec<f64> = u0.iter().zip(&f).map(|(u, fu)| u + h * fu).collect();
    check_finite(&cur, n)?;
    for m in 1..n {
        rhs(&mut f, &cur, p, t + m as f64 * h);
        for (pv, fu) in prev.iter_mut().zip(&f) {
            *pv += 2.0 * h * fu;
        }
        std::mem::swap(&mut prev, &mut cur);
        check_finite(&cur, n)?;
    }
    Ok(RowResult {
        value: cur,
        rhs_calls: n,
        solves: 0,
        factorizations: 0,
    })
}

/// Linearly-implicit Euler row with `W = I - (dt/n) J` already factored.
pub fn implicit_euler_row<F>(
    rhs: &F,
    w: &LuFactors,
    u0: &[f64],
    p: &[f64],
    t: f64,
    dt: f64,
    n: usize,
) -> Result<RowResult>
where
    F: Fn(&mut [f64], &[f64], &[f64], f64) + ?Sized,
{
    BaseMethod::LinearlyImplicitEuler.check_substeps(n)?;
    let d = u0.len();
    let h = dt / n as f64;
    let mut u = u0.to_vec();
    let mut f = vec![0.0; d];
    let mut delta = vec![0.0; d];
    for m in 0..n {
        rhs(&mut f, &u, p, t + m as f64 * h);
        f.iter_mut().for_each(|x| *x *= h);
        w.solve_into(&f, &mut delta);
        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui += di;
        }
        check_finite(&u, n)?;
    }
    Ok(RowResult {
        value: u,
        rhs_calls: n,
        solves: n,
        factorizations: 0,
    })
}

/// Linearly-implicit midpoint row with Gragg smoothing; `n` must be a
/// multiple of 4 and `W = I - (dt/n) J` already factored.
///
/// Runs `n + 1` substeps in increment form,
/// `Δ_1 = W^{-1} h f(u_0)`, `Δ_{m+1} = Δ_m + 2 W^{-1} (h f(u_m) - Δ_m)`,
/// and returns `(u_{n+1} + u_{n-1}) / 2`.
pub fn implicit_midpoint_smoothed_row<F>(
    rhs: &F,
    w: &LuFactors,
    u0: &[f64],
    p: &[f64],
    t: f64,
    dt: f64,
    n: usize,
) -> Result<RowResult>
where
    F: Fn(&mut [f64], &[f64], &[f64], f64) + ?Sized,
{
    BaseMethod::SmoothedImplicitMidpoint.check_substeps(n)?;
    let d = u0.len();
    let h = dt / n as f64;
    let mut f = vec![0.0; d];
    let mut delta = vec![0.0; d];
    let mut corr = vec![0.0; d];

    rhs(&mut f, u0, p, t);
    f.iter_mut().for_each(|x| *x *= h);
    w.solve_into(&f, &mut delta);
    let mut u: Vec<f64> = u0.iter().zip(&delta).map(|(a, b)| a + b).collect();
    check_finite(&u, n)?;
    let mut u_two_back = Vec::new();

    for m in 1..=n {
        if m == n - 1 {
            u_two_back = u.clone();
        }
        rhs(&mut f, &u, p, t + m as f64 * h);
        for (fi, di) in f.iter_mut().zip(&delta) {
            *fi = h * *fi - di;
        }
        w.solve_into(&f, &mut corr);
        for ((ui, di), ci) in u.iter_mut().zip(delta.iter_mut()).zip(&corr) {
            *di += 2.0 * ci;
            *ui += *di;
        }
        check_finite(&u, n)?;
    }
    let value: Vec<f64> = u.iter().zip(&u_two_back).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(RowResult {
        value,
        rhs_calls: n + 1,
        solves: n + 1,
        factorizations: 0,
    })
}

/// Factors `I - (dt/n) J` and runs one implicit row.
#[allow(clippy::too_many_arguments)]
pub fn implicit_row<F>(
    method: BaseMethod,
    rhs: &F,
    jacobian: &DenseMatrix,
    u0: &[f64],
    p: &[f64],
    t: f64,
    dt: f64,
    n: usize,
) -> Result<RowResult>
where
    F: Fn(&mut [f64], &[f64], &[f64], f64) + ?Sized,
{
    let w = lu_factor(&DenseMatrix::shifted_identity(jacobian, dt / n as f64))?;
    let mut row = match method {
        BaseMethod::LinearlyImplicitEuler => implicit_euler_row(rhs, &w, u0, p, t, dt, n)?,
        BaseMethod::SmoothedImplicitMidpoint => {
            implicit_midpoint_smoothed_row(rhs, &w, u0, p, t, dt, n)?
        }
        BaseMethod::ExplicitMidpoint => {
            return Err(Error::Config("explicit midpoint has no iteration matrix".into()))
        }
    };
    row.factorizations = 1;
    Ok(row)
}
