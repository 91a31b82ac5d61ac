//! Partitioned Runge-Kutta coefficient tableaus and their structural
//! properties.
//!
//! A tableau with `r` parts and `s` stages holds one strictly lower
//! triangular `s x s` matrix `A_k` and one weight vector `b_k` per part. The
//! abscissae are always the row sums of the last (most refined) part,
//! `c = A_r e`.

mod builtin;
mod text;

pub use builtin::{builtin_tableau, classical_rk4, BUILTIN_NAMES};
pub use text::{parse_tableau, write_tableau};

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Real};

/// Coefficients `{A_k, b_k, c}` of an explicit partitioned Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct PrkTableau<C> {
    a: Vec<Vec<Vec<C>>>,
    b: Vec<Vec<C>>,
    c: Vec<C>,
}

/// Summary of the structural properties of a tableau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableauProperties {
    /// Largest `p <= 3` for which all order conditions up to `p` hold.
    pub classical_order: usize,
    pub stage_order: usize,
    pub internally_consistent: bool,
    pub conservative: bool,
}

/// Highest order for which conditions are implemented.
pub const MAX_CHECKED_ORDER: usize = 3;

impl<C: Coefficient> PrkTableau<C> {
    /// Builds a tableau from the matrices `a[k]` (row-major, `s x s`) and
    /// weights `b[k]`.
    pub fn new(a: Vec<Vec<Vec<C>>>, b: Vec<Vec<C>>) -> Result<Self> {
        let r = a.len();
        if r == 0 {
            return Err(Error::InvalidTableau("need at least one part".into()));
        }
        if b.len() != r {
            return Err(Error::InvalidTableau(format!(
                "{r} coefficient matrices but {} weight vectors",
                b.len()
            )));
        }
        let s = a[0].len();
        if s == 0 {
            return Err(Error::InvalidTableau("need at least one stage".into()));
        }
        for (k, ak) in a.iter().enumerate() {
            if ak.len() != s || ak.iter().any(|row| row.len() != s) {
                return Err(Error::InvalidTableau(format!("A_{} is not {s}x{s}", k + 1)));
            }
            if b[k].len() != s {
                return Err(Error::InvalidTableau(format!("b_{} does not have length {s}", k + 1)));
            }
            for (i, row) in ak.iter().enumerate() {
                for (j, x) in row.iter().enumerate().skip(i) {
                    if !x.is_zero() {
                        return Err(Error::NotExplicit { part: k, stage: i, col: j });
                    }
                }
            }
        }
        let c = row_sums(&a[r - 1]);
        Ok(Self { a, b, c })
    }

    /// Number of operator parts `r`.
    pub fn parts(&self) -> usize {
        self.a.len()
    }

    /// Number of stages `s`.
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self, k: usize) -> &[Vec<C>] {
        &self.a[k]
    }

    pub fn b(&self, k: usize) -> &[C] {
        &self.b[k]
    }

    pub fn c(&self) -> &[C] {
        &self.c
    }

    /// `c^(k) = A_k e`.
    pub fn row_sums(&self, k: usize) -> Vec<C> {
        row_sums(&self.a[k])
    }

    /// Component-wise power `c^j`, with `c^0 = e`.
    pub fn c_pow(&self, j: usize) -> Vec<C> {
        self.c.iter().map(|ci| pow(ci, j)).collect()
    }

    /// Checks the order conditions for every level `1..=p`.
    ///
    /// Level 1: `b_k^T e = 1`. Level 2: `b_k^T A_l e = 1/2`. Level 3:
    /// `b_k^T C_l1 A_l2 e = 1/3` and `b_k^T A_l1 A_l2 e = 1/6`, with
    /// `C_l = diag(A_l e)`. The necessary quadrature conditions
    /// `b_k^T c^j = 1/(j+1)` for `j < p` are checked as well.
    pub fn check_order(&self, p: usize) -> Result<bool> {
        if !(1..=MAX_CHECKED_ORDER).contains(&p) {
            return Err(Error::UnsupportedOrder(p));
        }
        let r = self.parts();
        let sums: Vec<Vec<C>> = (0..r).map(|l| self.row_sums(l)).collect();
        for k in 0..r {
            let bk = &self.b[k];
            if !sum(bk).approx_eq(&C::one()) {
                return Ok(false);
            }
            for j in 1..p {
                let target = C::from_ratio(1, j as i64 + 1);
                if !dot(bk, &self.c_pow(j)).approx_eq(&target) {
                    return Ok(false);
                }
            }
            if p >= 2 {
                let half = C::from_ratio(1, 2);
                if sums.iter().any(|cl| !dot(bk, cl).approx_eq(&half)) {
                    return Ok(false);
                }
            }
            if p >= 3 {
                let third = C::from_ratio(1, 3);
                let sixth = C::from_ratio(1, 6);
                for l1 in 0..r {
                    for l2 in 0..r {
                        let diag: Vec<C> = sums[l1]
                            .iter()
                            .zip(&sums[l2])
                            .map(|(x, y)| x.clone() * y.clone())
                            .collect();
                        if !dot(bk, &diag).approx_eq(&third) {
                            return Ok(false);
                        }
                        let nested = matvec(&self.a[l1], &sums[l2]);
                        if !dot(bk, &nested).approx_eq(&sixth) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// Largest `p <= 3` satisfying [`check_order`](Self::check_order), or 0.
    pub fn classical_order(&self) -> usize {
        (1..=MAX_CHECKED_ORDER)
            .take_while(|&p| self.check_order(p).unwrap_or(false))
            .last()
            .unwrap_or(0)
    }

    /// Largest `q` with `A_k c^j = c^{j+1}/(j+1)` for `j < q` and all `k`.
    ///
    /// Capped at the stage count; for explicit tableaus with a nonzero
    /// abscissa the result is at most 1.
    pub fn stage_order(&self) -> usize {
        let s = self.stages();
        let mut q = 0;
        while q < s {
            let cj = self.c_pow(q);
            let target: Vec<C> = self
                .c_pow(q + 1)
                .into_iter()
                .map(|x| x * C::from_ratio(1, q as i64 + 1))
                .collect();
            let holds = self
                .a
                .iter()
                .all(|ak| vec_approx_eq(&matvec(ak, &cj), &target));
            if !holds {
                break;
            }
            q += 1;
        }
        q
    }

    /// `b_k = b_l` for all parts.
    pub fn is_conservative(&self) -> bool {
        self.b.windows(2).all(|w| vec_approx_eq(&w[0], &w[1]))
    }

    /// `A_k e = A_l e` for all parts.
    pub fn is_internally_consistent(&self) -> bool {
        let sums: Vec<Vec<C>> = (0..self.parts()).map(|k| self.row_sums(k)).collect();
        sums.windows(2).all(|w| vec_approx_eq(&w[0], &w[1]))
    }

    /// True when every `A_k` equals `A_1`.
    pub fn has_equal_matrices(&self) -> bool {
        self.a.windows(2).all(|w| {
            w[0].iter()
                .zip(&w[1])
                .all(|(x, y)| vec_approx_eq(x, y))
        })
    }

    pub fn properties(&self) -> TableauProperties {
        TableauProperties {
            classical_order: self.classical_order(),
            stage_order: self.stage_order(),
            internally_consistent: self.is_internally_consistent(),
            conservative: self.is_conservative(),
        }
    }

    /// Converts the coefficients to a floating point type.
    pub fn to_real<T: Real + Coefficient>(&self) -> PrkTableau<T> {
        let conv = |x: &C| T::lit(x.to_f64());
        PrkTableau {
            a: self
                .a
                .iter()
                .map(|ak| ak.iter().map(|row| row.iter().map(conv).collect()).collect())
                .collect(),
            b: self.b.iter().map(|bk| bk.iter().map(conv).collect()).collect(),
            c: self.c.iter().map(conv).collect(),
        }
    }
}

pub(crate) fn pow<C: Coefficient>(x: &C, j: usize) -> C {
    (0..j).fold(C::one(), |acc, _| acc * x.clone())
}

pub(crate) fn sum<C: Coefficient>(v: &[C]) -> C {
    v.iter().cloned().fold(C::zero(), |acc, x| acc + x)
}

pub(crate) fn dot<C: Coefficient>(u: &[C], v: &[C]) -> C {
    u.iter()
        .zip(v)
        .fold(C::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(crate) fn matvec<C: Coefficient>(a: &[Vec<C>], v: &[C]) -> Vec<C> {
    a.iter().map(|row| dot(row, v)).collect()
}

fn row_sums<C: Coefficient>(a: &[Vec<C>]) -> Vec<C> {
    a.iter().map(|row| sum(row)).collect()
}

fn vec_approx_eq<C: Coefficient>(u: &[C], v: &[C]) -> bool {
    u.len() == v.len() && u.iter().zip(v).all(|(x, y)| x.approx_eq(y))
}
