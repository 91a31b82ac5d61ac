//! Dense LU factorization with partial pivoting.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Maximum absolute row sum.
pub fn inf_norm<T: Real>(a: &DMatrix<T>) -> T {
    (0..a.nrows())
        .map(|i| a.row(i).iter().fold(T::zero(), |acc, x| acc + x.abs()))
        .fold(T::zero(), T::max)
}

/// `P A = L U` with unit lower triangular `L`, stored in one matrix.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: DMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(mut a: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        let scale = inf_norm(&a);
        let tiny = scale * T::epsilon() * T::count(n.max(1));
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= tiny || pivot == T::zero() {
                return Err(Error::Singular);
            }
            if p != k {
                a.swap_rows(p, k);
                perm.swap(p, k);
            }
            let inv = T::one() / a[(k, k)];
            for i in k + 1..n {
                a[(i, k)] *= inv;
            }
            for j in k + 1..n {
                let akj = a[(k, j)];
                if akj == T::zero() {
                    continue;
                }
                for i in k + 1..n {
                    let lik = a[(i, k)];
                    a[(i, j)] -= lik * akj;
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A X = B` for every column of `B`.
    pub fn solve(&self, b: &DMatrix<T>) -> DMatrix<T> {
        let n = self.dim();
        assert_eq!(b.nrows(), n);
        let mut x = DMatrix::zeros(n, b.ncols());
        for c in 0..b.ncols() {
            let mut col: Vec<T> = self.perm.iter().map(|&p| b[(p, c)]).collect();
            for k in 0..n {
                let xk = col[k];
                if xk != T::zero() {
                    for i in k + 1..n {
                        col[i] -= self.lu[(i, k)] * xk;
                    }
                }
            }
            for k in (0..n).rev() {
                col[k] /= self.lu[(k, k)];
                let xk = col[k];
                if xk != T::zero() {
                    for i in 0..k {
                        col[i] -= self.lu[(i, k)] * xk;
                    }
                }
            }
            x.column_mut(c).copy_from_slice(&col);
        }
        x
    }

    pub fn inverse(&self) -> DMatrix<T> {
        self.solve(&DMatrix::identity(self.dim(), self.dim()))
    }
}

/// `||A||_inf ||A^{-1}||_inf`; infinite for singular matrices.
pub fn cond_inf<T: Real>(a: &DMatrix<T>) -> T {
    match Lu::new(a.clone()) {
        Ok(lu) => inf_norm(a) * inf_norm(&lu.inverse()),
        Err(_) => T::infinity(),
    }
}
