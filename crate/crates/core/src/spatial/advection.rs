use super::weno::{pad, reconstruct_padded, Ghosts, Wind, WENO_MIN_CELLS};
use super::{Grid1D, SemiDiscreteProblem};
use crate::error::{Error, Result};
use crate::rhs::{ConservativeRhs, Face, Rhs};
use crate::scalar::Real;
use crate::spatial::Boundary;

/// `u_t + u_x = 0` on the periodic unit interval with WENO5 fluxes,
/// `u(x, 0) = sin^2(pi x)`.
#[derive(Debug, Clone)]
pub struct Advection1D<T> {
    grid: Grid1D<T>,
    faces: Vec<Face>,
}

impl<T: Real> Advection1D<T> {
    pub fn new(m: usize) -> Result<Self> {
        if m < WENO_MIN_CELLS {
            return Err(Error::GridTooSmall { min: WENO_MIN_CELLS, got: m });
        }
        let faces = (0..m)
            .map(|j| Face { minus: Some(j), plus: Some((j + 1) % m) })
            .collect();
        Ok(Self { grid: Grid1D::uniform(m, Boundary::Periodic), faces })
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn exact_at(x: T, t: T) -> T {
        let s = (T::PI() * (x - t)).sin();
        s * s
    }
}

impl<T: Real> Rhs<T> for Advection1D<T> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn eval(&self, t: T, v: &[T], out: &mut [T]) {
        let m = self.grid.len();
        let mut fl = vec![T::zero(); m];
        self.fluxes(t, v, &mut fl);
        let inv = T::one() / self.grid.dx[0];
        for j in 0..m {
            let left = if j == 0 { fl[m - 1] } else { fl[j - 1] };
            out[j] = (left - fl[j]) * inv;
        }
    }
}

impl<T: Real> ConservativeRhs<T> for Advection1D<T> {
    fn faces(&self) -> &[Face] {
        &self.faces
    }

    fn widths(&self) -> &[T] {
        &self.grid.dx
    }

    /// `out[j] = f_{j+1/2}`, `j = 0..m`.
    fn fluxes(&self, _t: T, v: &[T], out: &mut [T]) {
        let m = v.len();
        let mut ext = Vec::with_capacity(m + 6);
        pad(v, &Ghosts::Periodic, &mut ext);
        let mut all = vec![T::zero(); m + 1];
        reconstruct_padded(&ext, Wind::Positive, &mut all);
        out.copy_from_slice(&all[1..]);
    }
}

impl<T: Real> SemiDiscreteProblem<T> for Advection1D<T> {
    fn centers(&self) -> Vec<(f64, f64)> {
        self.grid.x.iter().map(|x| (x.as_f64(), 0.0)).collect()
    }

    fn cell_measures(&self) -> Vec<T> {
        self.grid.dx.clone()
    }

    fn initial(&self) -> Vec<T> {
        self.exact(T::zero()).expect("closed form")
    }

    fn exact(&self, t: T) -> Option<Vec<T>> {
        Some(self.grid.x.iter().map(|&x| Self::exact_at(x, t)).collect())
    }
}
