//! Linear error analysis of partitioned Runge-Kutta steps on `u' = L u`
//! with `L = L_1 + ... + L_r` and `Z_k = dt L_k`.

mod linalg;

pub use linalg::{cond_inf, inf_norm, Lu};

use nalgebra::{DMatrix, DVector};

use crate::decomposition::{CellPartition, LinearSplit};
use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Real};
use crate::tableau::{matvec, pow, PrkTableau};

/// Condition numbers of `r^T e` above this make `W` meaningless.
pub const COND_LIMIT: f64 = 1e12;

/// The matrices `Z_k = dt L_k` and their sum `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSplitting<T: Real> {
    z: Vec<DMatrix<T>>,
    total: DMatrix<T>,
}

impl<T: Real> LinearSplitting<T> {
    pub fn new(z: Vec<DMatrix<T>>) -> Result<Self> {
        let Some(first) = z.first() else {
            return Err(Error::WrongPartCount { expected: 1, got: 0 });
        };
        let m = first.nrows();
        for zk in &z {
            if zk.nrows() != m || zk.ncols() != m {
                return Err(Error::DimensionMismatch { expected: m, got: zk.ncols() });
            }
        }
        let total = z.iter().skip(1).fold(first.clone(), |acc, zk| acc + zk);
        Ok(Self { z, total })
    }

    /// `Z_k = dt L_k`.
    pub fn from_operators(ops: &[DMatrix<T>], dt: T) -> Result<Self> {
        Self::new(ops.iter().map(|l| l * dt).collect())
    }

    pub fn from_split(split: &LinearSplit<T>, dt: T) -> Result<Self> {
        Self::from_operators(split.operators(), dt)
    }

    /// Cell-based splitting `Z_k = dt I_k L`.
    pub fn cell_based(l: &DMatrix<T>, partition: &CellPartition, dt: T) -> Result<Self> {
        Self::from_split(&LinearSplit::cell_based(l, partition)?, dt)
    }

    pub fn parts(&self) -> usize {
        self.z.len()
    }

    pub fn dim(&self) -> usize {
        self.total.nrows()
    }

    pub fn z(&self, k: usize) -> &DMatrix<T> {
        &self.z[k]
    }

    /// `Z = sum_k Z_k`.
    pub fn total(&self) -> &DMatrix<T> {
        &self.total
    }
}

/// `r(Z)^T = [r_1, ..., r_s]`, `R(Z)` and the local error coefficients
/// `d_{j,k}(Z)` for `j = 1..=j_max`.
#[derive(Debug, Clone)]
pub struct ErrorOperators<T: Real> {
    r: Vec<DMatrix<T>>,
    r_t_e: DMatrix<T>,
    amplification: DMatrix<T>,
    /// `d[j - 1][k]`
    d: Vec<Vec<DMatrix<T>>>,
}

impl<T: Real> ErrorOperators<T> {
    /// `r_i(Z)`, `i` counted from 0.
    pub fn r(&self, i: usize) -> &DMatrix<T> {
        &self.r[i]
    }

    pub fn r_blocks(&self) -> &[DMatrix<T>] {
        &self.r
    }

    /// `r(Z)^T e = sum_i r_i(Z)`.
    pub fn r_t_e(&self) -> &DMatrix<T> {
        &self.r_t_e
    }

    /// `R(Z) = I + r(Z)^T e`.
    pub fn amplification(&self) -> &DMatrix<T> {
        &self.amplification
    }

    /// `d_{j,k}(Z)` with `j` counted from 1 and `k` from 0.
    pub fn d(&self, j: usize, k: usize) -> &DMatrix<T> {
        &self.d[j - 1][k]
    }

    pub fn j_max(&self) -> usize {
        self.d.len()
    }
}

fn coeff<C: Coefficient, T: Real>(x: &C) -> T {
    T::lit(x.to_f64())
}

/// Builds `r(Z)^T = (sum_k b_k^T (x) Z_k)(I - sum_k A_k (x) Z_k)^{-1}` by block
/// back substitution,
/// `r_j = sum_k b_j^(k) Z_k + sum_{i > j} r_i sum_k a_ij^(k) Z_k`,
/// and the coefficients
/// `d_{j,k} = (1 - j b_k^T c^{j-1}) I + sum_i r_i (c^j - j A_k c^{j-1})_i`.
pub fn build_error_operators<C: Coefficient, T: Real>(
    tableau: &PrkTableau<C>,
    ls: &LinearSplitting<T>,
    j_max: usize,
) -> Result<ErrorOperators<T>> {
    let r = tableau.parts();
    let s = tableau.stages();
    if ls.parts() != r {
        return Err(Error::PartCountMismatch { tableau: r, split: ls.parts() });
    }
    let m = ls.dim();

    let mut blocks: Vec<DMatrix<T>> = vec![DMatrix::zeros(m, m); s];
    for j in (0..s).rev() {
        let mut x = DMatrix::zeros(m, m);
        for k in 0..r {
            let bj = tableau.b(k)[j].clone();
            if !bj.is_zero_coeff() {
                x += ls.z(k) * coeff::<C, T>(&bj);
            }
        }
        for i in j + 1..s {
            // r_i Z_k, combined with the weights a_ij^(k)
            let mut weights = Vec::new();
            for k in 0..r {
                let a = &tableau.a(k)[i][j];
                if !a.is_zero_coeff() {
                    weights.push((k, coeff::<C, T>(a)));
                }
            }
            if weights.is_empty() {
                continue;
            }
            let mut combo = DMatrix::zeros(m, m);
            for (k, w) in weights {
                combo += ls.z(k) * w;
            }
            x += &blocks[i] * combo;
        }
        blocks[j] = x;
    }

    let mut r_t_e = DMatrix::zeros(m, m);
    for b in &blocks {
        r_t_e += b;
    }
    let amplification = DMatrix::identity(m, m) + &r_t_e;

    let mut d = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let c_prev = tableau.c_pow(j - 1);
        let c_j = tableau.c_pow(j);
        let jc = C::from_ratio(j as i64, 1);
        let mut row = Vec::with_capacity(r);
        for k in 0..r {
            let bc: C = tableau.b(k).iter().zip(&c_prev).fold(C::zero(), |acc, (b, c)| acc + b.clone() * c.clone());
            let scalar = C::one() - jc.clone() * bc;
            let ac = matvec(tableau.a(k), &c_prev);
            let mut dk = DMatrix::identity(m, m) * coeff::<C, T>(&scalar);
            for (i, block) in blocks.iter().enumerate() {
                let w = c_j[i].clone() - jc.clone() * ac[i].clone();
                if !w.is_zero_coeff() {
                    dk += block * coeff::<C, T>(&w);
                }
            }
            row.push(dk);
        }
        d.push(row);
    }

    Ok(ErrorOperators { r: blocks, r_t_e, amplification, d })
}

/// Solution of `(r^T e) W = sum_k d_{q+1,k} I_k`.
#[derive(Debug, Clone)]
pub struct WSolution<T: Real> {
    pub w: DMatrix<T>,
    pub norm: T,
    /// Condition number of `r^T e` in the maximum norm.
    pub cond: T,
}

/// Solves for `W` with `q` the stage order of the tableau.
///
/// Fails with [`Error::IllConditioned`] when `cond(r^T e)` exceeds
/// [`COND_LIMIT`].
pub fn solve_w<C: Coefficient, T: Real>(
    tableau: &PrkTableau<C>,
    ls: &LinearSplitting<T>,
    partition: &CellPartition,
) -> Result<WSolution<T>> {
    if partition.len() != ls.dim() {
        return Err(Error::DimensionMismatch { expected: ls.dim(), got: partition.len() });
    }
    if partition.parts() != ls.parts() {
        return Err(Error::PartCountMismatch { tableau: ls.parts(), split: partition.parts() });
    }
    let q = tableau.stage_order();
    let ops = build_error_operators(tableau, ls, q + 1)?;
    let m = ls.dim();
    let mut rhs = DMatrix::zeros(m, m);
    for k in 0..ls.parts() {
        let d = ops.d(q + 1, k);
        // d I_k keeps the columns of region k
        for col in 0..m {
            if partition.region(col) == k {
                rhs.set_column(col, &d.column(col));
            }
        }
    }
    let a = ops.r_t_e();
    let lu = match Lu::new(a.clone()) {
        Ok(lu) => lu,
        Err(_) => return Err(Error::IllConditioned { cond: f64::INFINITY, limit: COND_LIMIT }),
    };
    let cond = inf_norm(a) * inf_norm(&lu.inverse());
    if !(cond.as_f64() <= COND_LIMIT) {
        return Err(Error::IllConditioned { cond: cond.as_f64(), limit: COND_LIMIT });
    }
    let w = lu.solve(&rhs);
    let norm = inf_norm(&w);
    Ok(WSolution { w, norm, cond })
}

/// Norms entering the sufficient stability conditions of two-part splittings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport<T> {
    /// `||I + Z_1||_inf`
    pub norm1: T,
    /// `||I + Z_2 / 2||_inf`
    pub norm2: T,
    /// `||Z_2||_inf / 4`
    pub theta: T,
    pub stable1: bool,
    pub stable2: bool,
}

impl<T: Real> StabilityReport<T> {
    pub fn holds(&self) -> bool {
        self.stable1 && self.stable2
    }

    /// Whether `||Z_2||_inf <= 4 theta < 4`.
    pub fn theta_below_one(&self) -> bool {
        self.theta < T::one()
    }
}

/// Checks `||I + Z_1|| <= 1` and `||I + Z_2 / 2|| <= 1` (with a relative
/// slack of `1e-12` for rounding).
pub fn stability_check<T: Real>(ls: &LinearSplitting<T>) -> Result<StabilityReport<T>> {
    if ls.parts() != 2 {
        return Err(Error::WrongPartCount { expected: 2, got: ls.parts() });
    }
    let m = ls.dim();
    let id = DMatrix::<T>::identity(m, m);
    let norm1 = inf_norm(&(&id + ls.z(0)));
    let norm2 = inf_norm(&(&id + ls.z(1) * T::lit(0.5)));
    let theta = inf_norm(ls.z(1)) / T::lit(4.0);
    let bound = T::one() + T::lit(1e-12);
    Ok(StabilityReport { norm1, norm2, theta, stable1: norm1 <= bound, stable2: norm2 <= bound })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBound<T> {
    /// `max_{0 <= n <= n_max} ||R^n||_inf`
    pub max: T,
    pub argmax: usize,
}

/// Largest `||R^n||_inf` for `n = 0..=n_max` (`||R^0|| = 1`).
pub fn power_bound<T: Real>(r: &DMatrix<T>, n_max: usize) -> PowerBound<T> {
    let mut best = PowerBound { max: T::one(), argmax: 0 };
    let mut power = DMatrix::<T>::identity(r.nrows(), r.ncols());
    for n in 1..=n_max {
        power = &power * r;
        let norm = inf_norm(&power);
        if norm > best.max {
            best = PowerBound { max: norm, argmax: n };
        }
    }
    best
}

/// `q_{jk} = b_k^T A^{j-1} (c^2 - 2 A c)` for tableaus with equal `A_k`,
/// indexed `[j - 1][k]`.
pub fn equal_a_coefficients<C: Coefficient>(tableau: &PrkTableau<C>, j_max: usize) -> Result<Vec<Vec<C>>> {
    if !tableau.has_equal_matrices() {
        return Err(Error::UnequalCoefficientMatrices);
    }
    let a = tableau.a(0);
    let c = tableau.c();
    let two = C::from_ratio(2, 1);
    let ac = matvec(a, c);
    let mut v: Vec<C> = c
        .iter()
        .zip(&ac)
        .map(|(ci, aci)| pow(ci, 2) - two.clone() * aci.clone())
        .collect();
    let mut out = Vec::with_capacity(j_max);
    for _ in 1..=j_max {
        out.push(
            (0..tableau.parts())
                .map(|k| tableau.b(k).iter().zip(&v).fold(C::zero(), |acc, (b, x)| acc + b.clone() * x.clone()))
                .collect(),
        );
        v = matvec(a, &v);
    }
    Ok(out)
}

/// Truncated local error `sum_{j=1}^{l} dt^j / j! sum_k d_{j,k} phi_k^{(j-1)}`
/// with `phi[j - 1][k]` the `(j-1)`-th derivative of `F_k(t, u(t))` at `t_n`
/// and `l = min(phi.len(), ops.j_max())`.
pub fn predicted_local_error<T: Real>(ops: &ErrorOperators<T>, dt: T, phi: &[Vec<DVector<T>>]) -> DVector<T> {
    let l = phi.len().min(ops.j_max());
    let m = ops.amplification().nrows();
    let mut out = DVector::zeros(m);
    let mut factor = T::one();
    for j in 1..=l {
        factor = factor * dt / T::count(j);
        for (k, p) in phi[j - 1].iter().enumerate() {
            out += ops.d(j, k) * p * factor;
        }
    }
    out
}

/// Numerical rank of the blocks `r_1, ..., r_s` viewed as vectors, by
/// Gram-Schmidt with relative tolerance `tol`.
pub fn stage_rank<T: Real>(ops: &ErrorOperators<T>, tol: T) -> usize {
    let scale = ops
        .r_blocks()
        .iter()
        .map(|b| euclid(b.as_slice()))
        .fold(T::zero(), T::max);
    if scale == T::zero() {
        return 0;
    }
    let mut basis: Vec<Vec<T>> = Vec::new();
    for b in ops.r_blocks() {
        let mut v = b.as_slice().to_vec();
        for _ in 0..2 {
            for e in &basis {
                let proj: T = e.iter().zip(&v).map(|(&a, &b)| a * b).sum();
                for (x, &ei) in v.iter_mut().zip(e) {
                    *x -= proj * ei;
                }
            }
        }
        let norm = euclid(&v);
        if norm > tol * scale {
            basis.push(v.iter().map(|&x| x / norm).collect());
        }
    }
    basis.len()
}

fn euclid<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}
