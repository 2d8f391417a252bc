//! Dense real linear algebra for the linearly-implicit steppers.
//!
//! Matrices are small (d < 200), so everything is stored densely in row-major
//! order and factorized with a textbook right-looking LU with partial pivoting.
//! Nothing in here spawns threads; parallelism lives one level up, across the
//! ensemble of per-row factorizations.

use crate::error::{Error, Result};

/// Pivots smaller than this fraction of their row's largest original entry
/// are treated as zero.
pub const SINGULAR_RELATIVE_THRESHOLD: f64 = 1e-14;

/// Square matrix stored row-major: entry `(i, j)` lives at `data[i * dim + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from a slice of rows. Panics if the rows are ragged or
    /// not square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    /// Wraps row-major storage of length `dim * dim`.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[l * n + j];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `I - h J`, the iteration matrix of the linearly-implicit steppers.
    pub fn shifted_identity(jacobian: &DenseMatrix, h: f64) -> DenseMatrix {
        let n = jacobian.dim;
        let mut w = DenseMatrix {
            dim: n,
            data: jacobian.data.iter().map(|j| -h * j).collect(),
        };
        for i in 0..n {
            w.data[i * n + i] += 1.0;
        }
        w
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Packed LU factors with row permutation: `(P A)[i] = A[perm[i]]`, unit
/// lower-triangular `L` strictly below the diagonal and `U` on and above it.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.lu.dim
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DenseMatrix {
        let n = self.dim();
        let mut l = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                l[(i, j)] = self.lu[(i, j)];
            }
        }
        l
    }

    pub fn upper(&self) -> DenseMatrix {
        let n = self.dim();
        let mut u = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                u[(i, j)] = self.lu[(i, j)];
            }
        }
        u
    }

    /// Applies the row permutation to `a`, giving `P A`.
    pub fn permute_rows(&self, a: &DenseMatrix) -> DenseMatrix {
        let n = self.dim();
        let mut out = DenseMatrix::zeros(n);
        for (i, &src) in self.perm.iter().enumerate() {
            out.data[i * n..(i + 1) * n].copy_from_slice(a.row(src));
        }
        out
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x);
        x
    }

    /// Solves `A x = b` writing into `x`. `b` and `x` must both have length
    /// `dim` and must not alias.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        assert_eq!(x.len(), n);
        let a = &self.lu.data;
        for (xi, &p) in x.iter_mut().zip(&self.perm) {
            *xi = b[p];
        }
        for i in 1..n {
            let row = &a[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &a[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / a[i * n + i];
        }
    }
}

/// LU factorization with partial (row) pivoting.
///
/// Fails with [`Error::SingularMatrix`] when the chosen pivot falls below
/// [`SINGULAR_RELATIVE_THRESHOLD`] times the largest magnitude of that row in
/// the original matrix, so badly scaled but regular stiff iteration matrices
/// are not rejected.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    let n = a.dim;
    let row_scale: Vec<f64> = (0..n)
        .map(|i| a.row(i).iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .collect();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let data = &mut lu.data;

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = data[col * n + col].abs();
        for r in col + 1..n {
            let v = data[r * n + col].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        let threshold = SINGULAR_RELATIVE_THRESHOLD * row_scale[perm[pivot_row]];
        if !(pivot_abs > threshold) {
            return Err(Error::SingularMatrix {
                column: col,
                pivot: pivot_abs,
                threshold,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                data.swap(col * n + j, pivot_row * n + j);
            }
            perm.swap(col, pivot_row);
        }
        let pivot = data[col * n + col];
        for r in col + 1..n {
            let factor = data[r * n + col] / pivot;
            data[r * n + col] = factor;
            if factor != 0.0 {
                let (top, bottom) = data.split_at_mut(r * n);
                let src = &top[col * n + col + 1..(col + 1) * n];
                let dst = &mut bottom[col + 1..n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

/// `x = A^{-1} b` through existing factors.
pub fn lu_solve(factors: &LuFactors, b: &[f64]) -> Vec<f64> {
    factors.solve(b)
}

/// Perturbation used for column `i` of the forward-difference Jacobian.
pub fn jacobian_perturbation(ui: f64) -> f64 {
    f64::EPSILON.sqrt() * ui.abs().max(1e-5)
}

/// Forward-difference Jacobian of `f(du, u, p, t)` at `(u, t)`.
///
/// Costs `d + 1` evaluations of `f`; writes into `jac`.
pub fn finite_diff_jacobian_into<F>(
    f: F,
    u: &[f64],
    p: &[f64],
    t: f64,
    jac: &mut DenseMatrix,
) -> Result<()>
where
    F: Fn(&mut [f64], &[f64], &[f64], f64),
{
    let n = u.len();
    if jac.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: jac.dim(),
        });
    }
    let mut f0 = vec![0.0; n];
    f(&mut f0, u, p, t);
    if f0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteRhs);
    }
    let mut up = u.to_vec();
    let mut f1 = vec![0.0; n];
    for col in 0..n {
        let eps = jacobian_perturbation(u[col]);
        up[col] = u[col] + eps;
        // the representable step, not the nominal one
        let step = up[col] - u[col];
        f(&mut f1, &up, p, t);
        up[col] = u[col];
        if f1.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteRhs);
        }
        for row in 0..n {
            jac[(row, col)] = (f1[row] - f0[row]) / step;
        }
    }
    Ok(())
}

pub fn finite_diff_jacobian<F>(f: F, u: &[f64], p: &[f64], t: f64) -> Result<DenseMatrix>
where
    F: Fn(&mut [f64], &[f64], &[f64], f64),
{
    let mut jac = DenseMatrix::zeros(u.len());
    finite_diff_jacobian_into(f, u, p, t, &mut jac)?;
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reconstruction_error(a: &DenseMatrix) -> f64 {
        let f = lu_factor(a).unwrap();
        let pa = f.permute_rows(a);
        let lu = f.lower().matmul(&f.upper());
        let diff: f64 = pa
            .as_slice()
            .iter()
            .zip(lu.as_slice())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        diff / a.frobenius_norm()
    }

    #[test]
    fn identity_factors_trivially() {
        let f = lu_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.lower(), DenseMatrix::identity(3));
        assert_eq!(f.upper(), DenseMatrix::identity(3));
        assert_eq!(f.permutation(), &[0, 1, 2]);
    }

    #[test]
    fn two_by_two_reconstructs() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        assert!(reconstruction_error(&a) < 1e-15);
    }

    #[test]
    fn rank_one_is_singular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn zero_row_is_singular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0]]);
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn badly_scaled_rows_are_not_singular() {
        let a = DenseMatrix::from_rows(&[vec![1e-20, 0.0], vec![0.0, 1e20]]);
        let f = lu_factor(&a).unwrap();
        let x = f.solve(&[1e-20, 1e20]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_examples() {
        let f = lu_factor(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(lu_solve(&f, &[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);

        let f = lu_factor(&DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]])).unwrap();
        let x = lu_solve(&f, &[3.0, 5.0]);
        assert!((x[0] - 0.8).abs() < 1e-15);
        assert!((x[1] - 1.4).abs() < 1e-15);

        let f = lu_factor(&DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]])).unwrap();
        assert_eq!(lu_solve(&f, &[2.0, 4.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn fd_jacobian_of_linear_map() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, -2.0, 0.5],
            vec![0.0, 3.0, 4.0],
            vec![-1.0, 0.25, -7.0],
        ]);
        let f = |du: &mut [f64], u: &[f64], _: &[f64], _: f64| du.copy_from_slice(&a.mul_vec(u));
        let j = finite_diff_jacobian(f, &[0.3, -1.2, 2.0], &[], 0.0).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert!((j[(i, k)] - a[(i, k)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fd_jacobian_of_square() {
        let f = |du: &mut [f64], u: &[f64], _: &[f64], _: f64| {
            du[0] = u[0] * u[0];
            du[1] = u[1];
        };
        let j = finite_diff_jacobian(f, &[2.0, 3.0], &[], 0.0).unwrap();
        let expected = [[4.0, 0.0], [0.0, 1.0]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j[(i, k)] - expected[i][k]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn fd_jacobian_of_constant_is_zero() {
        let f = |du: &mut [f64], _: &[f64], _: &[f64], _: f64| du.fill(3.5);
        let j = finite_diff_jacobian(f, &[0.0, 1.0, -4.0], &[], 0.0).unwrap();
        assert!(j.as_slice().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn fd_jacobian_rejects_non_finite() {
        let f = |du: &mut [f64], u: &[f64], _: &[f64], _: f64| du[0] = 1.0 / (u[0] - 1.0);
        let err = finite_diff_jacobian(f, &[1.0], &[], 0.0).unwrap_err();
        assert_eq!(err, Error::NonFiniteRhs);
    }

    fn well_conditioned(dim: usize) -> impl Strategy<Value = DenseMatrix> {
        prop::collection::vec(-1.0f64..1.0, dim * dim).prop_map(move |mut v| {
            // diagonal dominance keeps the condition number modest
            for i in 0..dim {
                v[i * dim + i] += dim as f64 * if v[i * dim + i] < 0.0 { -1.0 } else { 1.0 };
            }
            DenseMatrix::from_row_major(dim, v).unwrap()
        })
    }

    fn matrix_and_rhs() -> impl Strategy<Value = (DenseMatrix, Vec<f64>)> {
        (1usize..=50).prop_flat_map(|d| {
            (
                well_conditioned(d),
                prop::collection::vec(-10.0f64..10.0, d),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reconstruction_within_tolerance((a, _b) in matrix_and_rhs()) {
            prop_assert!(reconstruction_error(&a) <= 1e-12);
        }

        #[test]
        fn solve_round_trip((a, b) in matrix_and_rhs()) {
            let f = lu_factor(&a).unwrap();
            let x = lu_solve(&f, &b);
            let ax = a.mul_vec(&x);
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let res = ax.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            prop_assert!(res <= 1e-10 * bnorm.max(f64::MIN_POSITIVE));
        }
    }
}
