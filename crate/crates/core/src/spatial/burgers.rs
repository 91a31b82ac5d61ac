use super::weno::{pad, reconstruct_padded, Ghosts, Wind, WENO_MIN_CELLS};
use super::{Boundary, Grid1D, SemiDiscreteProblem};
use crate::error::{Error, Result};
use crate::rhs::{ConservativeRhs, Face, Rhs};
use crate::scalar::Real;

/// Local Lax-Friedrichs flux for `f(u) = u^2 / 2` with
/// `alpha = max(|u_minus|, |u_plus|)`.
#[inline]
pub fn llf_flux<T: Real>(u_minus: T, u_plus: T) -> T {
    let half = T::lit(0.5);
    let alpha = u_minus.abs().max(u_plus.abs());
    half * (half * u_minus * u_minus + half * u_plus * u_plus + alpha * (u_minus - u_plus))
}

/// Location of the shock: the downward crossing of the level `1/2` with the
/// steepest drop, linearly interpolated between cell centers.
///
/// Returns `None` if `u` never drops through `1/2`.
pub fn shock_position<T: Real>(x: &[T], u: &[T]) -> Option<T> {
    let half = T::lit(0.5);
    let mut best: Option<(T, T)> = None;
    for j in 0..u.len().saturating_sub(1) {
        let (a, b) = (u[j], u[j + 1]);
        if a >= half && b < half {
            let drop = a - b;
            let pos = x[j] + (x[j + 1] - x[j]) * (a - half) / drop;
            if best.is_none_or(|(d, _)| drop > d) {
                best = Some((drop, pos));
            }
        }
    }
    best.map(|(_, pos)| pos)
}

/// Periodic Burgers equation `u_t + (u^2/2)_x = 0` on `[0, 1]` with WENO5
/// reconstructed states and LLF fluxes. Initial data is the block profile
/// `u = 1` on `[0, 1/2]`, `0` elsewhere.
#[derive(Debug, Clone)]
pub struct BurgersLlf<T> {
    grid: Grid1D<T>,
    faces: Vec<Face>,
}

impl<T: Real> BurgersLlf<T> {
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
}

impl<T: Real> Rhs<T> for BurgersLlf<T> {
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

impl<T: Real> ConservativeRhs<T> for BurgersLlf<T> {
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
        let mut minus = vec![T::zero(); m + 1];
        let mut plus = vec![T::zero(); m + 1];
        reconstruct_padded(&ext, Wind::Positive, &mut minus);
        reconstruct_padded(&ext, Wind::Negative, &mut plus);
        for (j, o) in out.iter_mut().enumerate() {
            *o = llf_flux(minus[j + 1], plus[j + 1]);
        }
    }
}

impl<T: Real> SemiDiscreteProblem<T> for BurgersLlf<T> {
    fn centers(&self) -> Vec<(f64, f64)> {
        self.grid.x.iter().map(|x| (x.as_f64(), 0.0)).collect()
    }

    fn cell_measures(&self) -> Vec<T> {
        self.grid.dx.clone()
    }

    fn initial(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.grid
            .x
            .iter()
            .map(|&x| if x <= half { T::one() } else { T::zero() })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhs::mass;

    #[test]
    fn llf_of_unit_jump() {
        assert_eq!(llf_flux(1.0, 0.0), 0.75);
        assert_eq!(llf_flux(0.0, 0.0), 0.0);
        assert_eq!(llf_flux(-1.0, 0.0), -0.25);
    }

    #[test]
    fn constant_state_flux_and_rhs() {
        let p = BurgersLlf::<f64>::new(12).unwrap();
        let v = vec![0.8; 12];
        let mut fl = vec![0.0; 12];
        p.fluxes(0.0, &v, &mut fl);
        assert!(fl.iter().all(|&f| (f - 0.32).abs() < 1e-15));
        let mut out = vec![1.0; 12];
        p.eval(0.0, &v, &mut out);
        assert!(out.iter().all(|&x| x.abs() < 1e-13));
    }

    #[test]
    fn rhs_is_conservative() {
        let p = BurgersLlf::<f64>::new(40).unwrap();
        let v: Vec<f64> = (0..40).map(|j| ((j * 7919) % 13) as f64 / 5.0 - 1.0).collect();
        let mut out = vec![0.0; 40];
        p.eval(0.0, &v, &mut out);
        assert!(mass(p.widths(), &out).unwrap().abs() < 1e-12);
    }

    #[test]
    fn block_profile_has_half_mass() {
        let p = BurgersLlf::<f64>::new(100).unwrap();
        let u = p.initial();
        assert!((mass(&p.cell_measures(), &u).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(u[49], 1.0);
        assert_eq!(u[50], 0.0);
    }

    #[test]
    fn shock_locator_ignores_rising_edge() {
        let x: Vec<f64> = (0..10).map(|j| (j as f64 + 0.5) / 10.0).collect();
        let u = vec![0.0, 0.0, 0.3, 0.7, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let s = shock_position(&x, &u).unwrap();
        assert!((s - 0.7).abs() < 1e-12);
        assert!(shock_position(&x, &[0.0; 10]).is_none());
    }
}
