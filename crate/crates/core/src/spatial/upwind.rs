use nalgebra::DMatrix;

use super::{Boundary, Grid1D, SemiDiscreteProblem};
use crate::error::{Error, Result};
use crate::rhs::{ConservativeRhs, Face, Rhs};
use crate::scalar::Real;

/// First-order upwind discretization of `u_t + u_x = 0`:
/// `u_j' = (u_{j-1} - u_j) / dx_j`, with `u_0` the inflow value or the
/// periodic neighbour.
#[derive(Debug, Clone)]
pub struct Upwind1D<T> {
    grid: Grid1D<T>,
    faces: Vec<Face>,
}

impl<T: Real> Upwind1D<T> {
    pub fn new(grid: Grid1D<T>) -> Result<Self> {
        let m = grid.len();
        if m < 2 {
            return Err(Error::GridTooSmall { min: 2, got: m });
        }
        let faces = match grid.boundary {
            Boundary::Periodic => (0..m)
                .map(|j| Face { minus: Some(j), plus: Some((j + 1) % m) })
                .collect(),
            Boundary::Inflow(_) => (0..=m)
                .map(|f| Face {
                    minus: f.checked_sub(1),
                    plus: (f < m).then_some(f),
                })
                .collect(),
        };
        Ok(Self { grid, faces })
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    /// Lower bidiagonal matrix `L` (plus the periodic corner entry).
    pub fn matrix(&self) -> DMatrix<T> {
        let m = self.grid.len();
        let mut l = DMatrix::zeros(m, m);
        for j in 0..m {
            let inv = T::one() / self.grid.dx[j];
            l[(j, j)] = -inv;
            match (j, &self.grid.boundary) {
                (0, Boundary::Periodic) => l[(0, m - 1)] = inv,
                (0, Boundary::Inflow(_)) => {}
                _ => l[(j, j - 1)] = inv,
            }
        }
        l
    }

    /// Source term `g(t)` with `F(t, v) = L v + g(t)`.
    pub fn forcing(&self, t: T) -> Vec<T> {
        let mut g = vec![T::zero(); self.grid.len()];
        if let Boundary::Inflow(inflow) = &self.grid.boundary {
            g[0] = inflow(t) / self.grid.dx[0];
        }
        g
    }
}

impl<T: Real> Rhs<T> for Upwind1D<T> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn eval(&self, t: T, v: &[T], out: &mut [T]) {
        let m = self.grid.len();
        let upstream = match &self.grid.boundary {
            Boundary::Periodic => v[m - 1],
            Boundary::Inflow(inflow) => inflow(t),
        };
        out[0] = (upstream - v[0]) / self.grid.dx[0];
        for j in 1..m {
            out[j] = (v[j - 1] - v[j]) / self.grid.dx[j];
        }
    }
}

impl<T: Real> ConservativeRhs<T> for Upwind1D<T> {
    fn faces(&self) -> &[Face] {
        &self.faces
    }

    fn widths(&self) -> &[T] {
        &self.grid.dx
    }

    fn fluxes(&self, t: T, v: &[T], out: &mut [T]) {
        match &self.grid.boundary {
            Boundary::Periodic => out.copy_from_slice(v),
            Boundary::Inflow(inflow) => {
                out[0] = inflow(t);
                out[1..].copy_from_slice(v);
            }
        }
    }
}

impl<T: Real> SemiDiscreteProblem<T> for Upwind1D<T> {
    fn centers(&self) -> Vec<(f64, f64)> {
        self.grid.x.iter().map(|x| (x.as_f64(), 0.0)).collect()
    }

    fn cell_measures(&self) -> Vec<T> {
        self.grid.dx.clone()
    }

    fn initial(&self) -> Vec<T> {
        vec![T::zero(); self.grid.len()]
    }

    fn linear_matrix(&self) -> Option<DMatrix<T>> {
        Some(self.matrix())
    }
}

/// Conservative rhs assembled from faces; used to cross-check `eval`.
#[cfg(test)]
pub(crate) fn eval_from_fluxes<T: Real, R: ConservativeRhs<T>>(rhs: &R, t: T, v: &[T]) -> Vec<T> {
    let mut fl = vec![T::zero(); rhs.faces().len()];
    rhs.fluxes(t, v, &mut fl);
    let mut out = vec![T::zero(); rhs.dim()];
    crate::rhs::scatter_fluxes(rhs.faces(), rhs.widths(), &fl, |_| true, &mut out);
    out
}
