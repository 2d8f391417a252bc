//! Subdividing sequences, polynomial extrapolation to zero step size, and
//! the per-order work model used by order selection.
//!
//! Row `j` of the extrapolation table is the base method run with `n_j`
//! substeps, giving `T_{j,1}` at internal step `h_j = dt / n_j`. Treating it
//! as a polynomial in `x = h^power` through the points `x_j = n_j^{-power}`
//! and evaluating at `x = 0` eliminates the leading error terms. Symmetric
//! base methods have even expansions and use `power = 2`.

use crate::steppers::BaseMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    /// 1, 2, 3, 4, 5, ...
    Harmonic,
    /// 1, 2, 4, 8, 16, ...
    Romberg,
    /// 1, 2, 3, 4, 6, 8, 12, 16, ...
    Bulirsch,
}

impl SequenceKind {
    pub fn name(self) -> &'static str {
        match self {
            SequenceKind::Harmonic => "harmonic",
            SequenceKind::Romberg => "romberg",
            SequenceKind::Bulirsch => "bulirsch",
        }
    }

    fn base_values(self, count: usize) -> Vec<usize> {
        match self {
            SequenceKind::Harmonic => (1..=count).collect(),
            SequenceKind::Romberg => (0..count).map(|j| 1usize << j).collect(),
            SequenceKind::Bulirsch => {
                let mut v = Vec::with_capacity(count);
                for j in 0..count {
                    let n = if j < 3 { j + 1 } else { 2 * v[j - 2] };
                    v.push(n);
                }
                v
            }
        }
    }
}

impl std::str::FromStr for SequenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "harmonic" => Ok(SequenceKind::Harmonic),
            "romberg" => Ok(SequenceKind::Romberg),
            "bulirsch" => Ok(SequenceKind::Bulirsch),
            other => Err(format!("unknown sequence kind '{other}'")),
        }
    }
}

/// A subdividing sequence scaled elementwise by `multiple`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubdividingSequence {
    pub kind: SequenceKind,
    pub multiple: usize,
}

impl SubdividingSequence {
    pub fn new(kind: SequenceKind, multiple: usize) -> Self {
        assert!(multiple >= 1, "sequence multiple must be positive");
        Self { kind, multiple }
    }

    /// First `count` substep counts.
    pub fn values(&self, count: usize) -> Vec<usize> {
        sequence_values(*self, count)
    }
}

pub fn sequence_values(seq: SubdividingSequence, count: usize) -> Vec<usize> {
    seq.kind
        .base_values(count)
        .into_iter()
        .map(|n| n * seq.multiple)
        .collect()
}

/// Aitken–Neville extrapolation of the first column `column[0..k]`.
///
/// Returns `(T_{k,k}, T_{k,k-1})`. For `k = 1` both are `T_{1,1}`.
pub fn aitken_neville(column: &[Vec<f64>], seq: &[usize], power: u32) -> (Vec<f64>, Vec<f64>) {
    let k = column.len();
    assert!(k >= 1, "need at least one row");
    assert!(seq.len() >= k, "sequence shorter than column");
    let mut t: Vec<Vec<f64>> = column.to_vec();
    let mut sub = t[k - 1].clone();
    for m in 1..k {
        if m == k - 1 {
            sub.clone_from(&t[k - 1]);
        }
        for j in (m..k).rev() {
            let ratio = (seq[j] as f64 / seq[j - m] as f64).powi(power as i32);
            let denom = ratio - 1.0;
            let (lo, hi) = t.split_at_mut(j);
            let prev = &lo[j - 1];
            for (a, b) in hi[0].iter_mut().zip(prev) {
                *a += (*a - b) / denom;
            }
        }
    }
    (t.swap_remove(k - 1), sub)
}

/// Precomputed barycentric extrapolation coefficients.
///
/// `coeffs(k)[j]` weights `T_{j+1,1}` in the order-`k` extrapolant, so that
/// `T_{k,k} = Σ_j coeffs(k)[j] T_{j+1,1}`. Each row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricTableau {
    power: u32,
    seq: Vec<usize>,
    coeffs: Vec<Vec<f64>>,
}

impl BarycentricTableau {
    /// Builds coefficients for orders `1..=max_order` from the first
    /// `max_order` entries of `seq` in O(max_order²) operations.
    ///
    /// With nodes `x_j = n_j^(-p)`, the barycentric weights
    /// `w_j = Π_{i≠j} 1/(x_j - x_i)` and `ρ(0) = Π_i (-x_i)` give the
    /// coefficient `ρ(0) w_j / (-x_j) = Π_{i≠j} x_i / (x_i - x_j)`. Written as
    /// `Π_{i≠j} n_j^p / (n_j^p - n_i^p)` every factor is a ratio of exact
    /// integers, which avoids the cancellation in `x_j - x_i` for close nodes.
    /// Numerator and denominator products are kept apart and updated
    /// incrementally as nodes are added; both stay exact integers while
    /// below 2^53, so each coefficient costs a single rounding.
    pub fn new(seq: &[usize], power: u32, max_order: usize) -> Self {
        assert!(max_order >= 1);
        assert!(seq.len() >= max_order, "sequence shorter than max_order");
        assert!(power == 1 || power == 2, "power must be 1 or 2");
        let m: Vec<f64> = seq[..max_order].iter().map(|&n| (n as f64).powi(power as i32)).collect();
        let mut num: Vec<f64> = Vec::with_capacity(max_order);
        let mut den: Vec<f64> = Vec::with_capacity(max_order);
        let mut coeffs = Vec::with_capacity(max_order);
        for k in 0..max_order {
            let mk = m[k];
            let (mut nk, mut dk) = (1.0, 1.0);
            for j in 0..k {
                num[j] *= m[j];
                den[j] *= m[j] - mk;
                nk *= mk;
                dk *= mk - m[j];
            }
            num.push(nk);
            den.push(dk);
            coeffs.push(num.iter().zip(&den).map(|(a, b)| a / b).collect());
        }
        Self {
            power,
            seq: seq[..max_order].to_vec(),
            coeffs,
        }
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn sequence(&self) -> &[usize] {
        &self.seq
    }

    pub fn coeffs(&self, k: usize) -> &[f64] {
        &self.coeffs[k - 1]
    }

    /// Order-`k` extrapolant written into `out`.
    ///
    /// Evaluated as `T_{k,1} + Σ_{j<k} c_j (T_{j,1} - T_{k,1})`, equal to the
    /// plain combination because the coefficients sum to one, but exact on
    /// constant data and free of the cancellation between large coefficients.
    pub fn extrapolate_into(&self, k: usize, column: &[Vec<f64>], out: &mut [f64]) {
        assert!(column.len() >= k);
        let anchor = &column[k - 1];
        out.copy_from_slice(anchor);
        for (c, row) in self.coeffs(k)[..k - 1].iter().zip(column) {
            for ((o, v), a) in out.iter_mut().zip(row).zip(anchor) {
                *o += c * (v - a);
            }
        }
    }
}

pub fn build_barycentric_tableau(seq: &[usize], power: u32, max_order: usize) -> BarycentricTableau {
    BarycentricTableau::new(seq, power, max_order)
}

/// `Σ_j c_{k,j} T_{j,1}`; O(k d).
pub fn barycentric_extrapolate(
    tableau: &BarycentricTableau,
    k: usize,
    column: &[Vec<f64>],
) -> Vec<f64> {
    let d = column.first().map_or(0, Vec::len);
    let mut out = vec![0.0; d];
    tableau.extrapolate_into(k, column, &mut out);
    out
}

/// Cost weights of the work model, in right-hand-side evaluation units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkWeights {
    pub rhs: f64,
    pub jacobian: f64,
    pub lu: f64,
    pub solve: f64,
}

impl WorkWeights {
    pub const UNIT: WorkWeights = WorkWeights {
        rhs: 1.0,
        jacobian: 1.0,
        lu: 1.0,
        solve: 1.0,
    };

    /// Default weights for a system of dimension `dim`: a Jacobian costs
    /// `dim / 5` right-hand sides, everything else one.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            jacobian: dim as f64 / 5.0,
            ..Self::UNIT
        }
    }
}

/// Stage count `A_k` of one step at order `k`.
///
/// Explicit midpoint: `Σ_{j ≤ k+1} (n_j + 1)`. Implicit methods:
/// `Σ_{j ≤ k} (c_f·f_j + c_lu + c_bs·s_j) + c_jac`, where `f_j`/`s_j` are the
/// row's right-hand-side calls and substitutions (`n_j` for linearly-implicit
/// Euler, `n_j + 1` for the smoothed midpoint rule).
pub fn stage_count(method: BaseMethod, seq: &[usize], k: usize, weights: WorkWeights) -> f64 {
    match method {
        BaseMethod::ExplicitMidpoint => {
            assert!(seq.len() > k, "explicit work model needs k + 1 sequence values");
            seq[..=k].iter().map(|&n| weights.rhs * (n as f64 + 1.0)).sum()
        }
        BaseMethod::LinearlyImplicitEuler | BaseMethod::SmoothedImplicitMidpoint => {
            assert!(seq.len() >= k);
            let row: f64 = seq[..k]
                .iter()
                .map(|&n| {
                    let calls = method.rhs_calls(n) as f64;
                    let solves = method.solves(n) as f64;
                    weights.rhs * calls + weights.lu + weights.solve * solves
                })
                .sum();
            row + weights.jacobian
        }
    }
}

/// Cached `A_k` for `k = 1..=max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkModel {
    stages: Vec<f64>,
}

impl WorkModel {
    pub fn new(method: BaseMethod, seq: SubdividingSequence, max_order: usize, weights: WorkWeights) -> Self {
        let values = seq.values(max_order + 1);
        let stages = (1..=max_order)
            .map(|k| stage_count(method, &values, k, weights))
            .collect();
        Self { stages }
    }

    pub fn stage_count(&self, k: usize) -> f64 {
        self.stages[k - 1]
    }

    pub fn max_order(&self) -> usize {
        self.stages.len()
    }
}
