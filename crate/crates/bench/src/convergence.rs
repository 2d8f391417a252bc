//! Fixed-step order study on `u' = -u`, `u(0) = 1`, `t ∈ (0, 1)`.

use parex::{solve_fixed, Algorithm, OdeProblem};

use crate::error::{BenchError, Result};

pub const DEFAULT_DTS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub algorithm: Algorithm,
    pub rows: Vec<usize>,
    pub dts: Vec<f64>,
    /// `errors[r][i]`: final-time error with `rows[r]` rows and step `dts[i]`.
    pub errors: Vec<Vec<f64>>,
    /// Least-squares slope of `ln error` against `ln dt`, per row count.
    pub slopes: Vec<f64>,
}

impl ConvergenceTable {
    /// Slope gained by each added row.
    pub fn increments(&self) -> Vec<f64> {
        self.slopes.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn convergence_study(alg: Algorithm, rows: &[usize], dts: &[f64]) -> Result<ConvergenceTable> {
    if rows.is_empty() || dts.len() < 2 {
        return Err(BenchError::Config("convergence study needs rows and at least two step sizes".into()));
    }
    let problem = OdeProblem::new(|du, u, _p, _t| du[0] = -u[0], vec![1.0], (0.0, 1.0));
    let exact = (-1.0f64).exp();
    let mut errors = Vec::with_capacity(rows.len());
    for &k in rows {
        let mut row = Vec::with_capacity(dts.len());
        for &dt in dts {
            let sol = solve_fixed(&problem, alg, k, dt)?;
            row.push((sol.final_state()[0] - exact).abs());
        }
        errors.push(row);
    }
    let slopes = errors.iter().map(|e| loglog_slope(dts, e)).collect();
    Ok(ConvergenceTable {
        algorithm: alg,
        rows: rows.to_vec(),
        dts: dts.to_vec(),
        errors,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(4)).collect();
        assert!((loglog_slope(&xs, &ys) - 4.0).abs() < 1e-12);
    }
}
