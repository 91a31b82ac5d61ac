//! Semi-discrete right-hand sides.
//!
//! * [`Upwind1D`]: first-order upwind advection with an explicit matrix form.
//! * [`Advection1D`]: periodic `u_t + u_x = 0` with WENO5 fluxes.
//! * [`BurgersLlf`]: periodic Burgers with local Lax-Friedrichs fluxes.
//! * [`Advection2D`]: rotating flow on the unit square.

mod advection;
mod advection2d;
mod burgers;
mod norms;
mod upwind;
mod weno;

pub use advection::Advection1D;
pub use advection2d::Advection2D;
pub use burgers::{llf_flux, shock_position, BurgersLlf};
pub use norms::{norms, ErrorNorms};
pub use upwind::Upwind1D;
pub use weno::{weno5_flux, weno5_left, Ghosts, Wind, WENO_EPS, WENO_MIN_CELLS};

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::rhs::ConservativeRhs;
use crate::scalar::Real;

/// Boundary treatment of a 1D grid.
#[derive(Clone)]
pub enum Boundary<T> {
    Periodic,
    /// Inflow at the left end with the given value as a function of time.
    Inflow(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T> Boundary<T> {
    pub fn homogeneous_inflow() -> Self
    where
        T: Real,
    {
        Boundary::Inflow(Arc::new(|_| T::zero()))
    }
}

impl<T> fmt::Debug for Boundary<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => f.write_str("Periodic"),
            Boundary::Inflow(_) => f.write_str("Inflow(..)"),
        }
    }
}

/// Cell widths and centers on `[0, L]`.
#[derive(Debug, Clone)]
pub struct Grid1D<T> {
    pub x: Vec<T>,
    pub dx: Vec<T>,
    pub boundary: Boundary<T>,
}

impl<T: Real> Grid1D<T> {
    /// `m` equal cells on `[0, 1]`.
    pub fn uniform(m: usize, boundary: Boundary<T>) -> Self {
        Self::from_widths(vec![T::one() / T::count(m); m], boundary)
    }

    pub fn from_widths(dx: Vec<T>, boundary: Boundary<T>) -> Self {
        assert!(dx.iter().all(|&w| w > T::zero()), "cell widths must be positive");
        let half = T::lit(0.5);
        let mut left = T::zero();
        let x = dx
            .iter()
            .map(|&w| {
                let c = left + half * w;
                left += w;
                c
            })
            .collect();
        Self { x, dx, boundary }
    }

    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }

    pub fn length(&self) -> T {
        self.dx.iter().copied().sum()
    }
}

/// A semi-discrete problem: a conservative right-hand side plus grid
/// geometry, initial data and (where known) the exact PDE solution.
pub trait SemiDiscreteProblem<T: Real>: ConservativeRhs<T> {
    /// Cell center coordinates (`y = 0` in 1D).
    fn centers(&self) -> Vec<(f64, f64)>;

    /// Cell measures used for mass and the discrete L1 norm.
    fn cell_measures(&self) -> Vec<T>;

    fn initial(&self) -> Vec<T>;

    /// Exact PDE solution sampled at the cell centers.
    fn exact(&self, _t: T) -> Option<Vec<T>> {
        None
    }

    /// Face midpoints in face order, for problems whose flux partition is
    /// defined geometrically rather than from the cells.
    fn face_midpoints(&self) -> Option<Vec<(f64, f64)>> {
        None
    }

    /// Matrix `L` with `F(t, v) = L v + g(t)` for linear discretizations.
    fn linear_matrix(&self) -> Option<DMatrix<T>> {
        None
    }
}
