//! Fifth-order WENO reconstruction (Jiang-Shu smoothness indicators).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Regularization in the nonlinear weights `d_k / (eps + beta_k)^2`.
pub const WENO_EPS: f64 = 1e-6;

/// Minimum number of cells for the five-point stencils.
pub const WENO_MIN_CELLS: usize = 6;

/// Upwind direction of a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wind {
    /// Information travels to the right; interface values come from the left.
    Positive,
    Negative,
}

/// Ghost values around a 1D grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Ghosts<T> {
    Periodic,
    /// Three values left of the first cell (outermost first) and three right
    /// of the last cell (innermost first).
    Values { left: [T; 3], right: [T; 3] },
}

/// Interface value at `x_{i+1/2}` reconstructed from the left, given the
/// five values `v_{i-2}, ..., v_{i+2}`.
#[inline]
pub fn weno5_left<T: Real>(vm2: T, vm1: T, v0: T, vp1: T, vp2: T) -> T {
    let c13_12 = T::lit(13.0 / 12.0);
    let quarter = T::lit(0.25);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);

    let d0 = vm2 - two * vm1 + v0;
    let e0 = vm2 - four * vm1 + three * v0;
    let beta0 = c13_12 * d0 * d0 + quarter * e0 * e0;
    let d1 = vm1 - two * v0 + vp1;
    let e1 = vm1 - vp1;
    let beta1 = c13_12 * d1 * d1 + quarter * e1 * e1;
    let d2 = v0 - two * vp1 + vp2;
    let e2 = three * v0 - four * vp1 + vp2;
    let beta2 = c13_12 * d2 * d2 + quarter * e2 * e2;

    let eps = T::lit(WENO_EPS);
    let a0 = T::lit(0.1) / ((eps + beta0) * (eps + beta0));
    let a1 = T::lit(0.6) / ((eps + beta1) * (eps + beta1));
    let a2 = T::lit(0.3) / ((eps + beta2) * (eps + beta2));

    let sixth = T::lit(1.0 / 6.0);
    let q0 = (two * vm2 - T::lit(7.0) * vm1 + T::lit(11.0) * v0) * sixth;
    let q1 = (-vm1 + T::lit(5.0) * v0 + two * vp1) * sixth;
    let q2 = (two * v0 + T::lit(5.0) * vp1 - vp2) * sixth;

    (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)
}

/// Copies `v` into a buffer padded with three ghost cells on each side.
pub(crate) fn pad<T: Real>(v: &[T], ghosts: &Ghosts<T>, ext: &mut Vec<T>) {
    let m = v.len();
    ext.clear();
    match ghosts {
        Ghosts::Periodic => {
            ext.extend((0..3).map(|g| v[(m + g - 3) % m]));
            ext.extend_from_slice(v);
            ext.extend((0..3).map(|g| v[g % m]));
        }
        Ghosts::Values { left, right } => {
            ext.extend_from_slice(left);
            ext.extend_from_slice(v);
            ext.extend_from_slice(right);
        }
    }
}

/// Reconstructs all `m + 1` interface values `x_{1/2}, ..., x_{m+1/2}` of a
/// padded buffer (see [`pad`]).
pub(crate) fn reconstruct_padded<T: Real>(ext: &[T], wind: Wind, out: &mut [T]) {
    let m = ext.len() - 6;
    debug_assert_eq!(out.len(), m + 1);
    for (f, o) in out.iter_mut().enumerate() {
        // interface f sits between padded cells f + 2 and f + 3
        *o = match wind {
            Wind::Positive => weno5_left(ext[f], ext[f + 1], ext[f + 2], ext[f + 3], ext[f + 4]),
            Wind::Negative => weno5_left(ext[f + 5], ext[f + 4], ext[f + 3], ext[f + 2], ext[f + 1]),
        };
    }
}

/// Upwind-biased WENO5 interface values `f_{j-1/2}` for `j = 1..=m+1`
/// (length `m + 1`).
pub fn weno5_flux<T: Real>(v: &[T], wind: Wind, ghosts: &Ghosts<T>) -> Result<Vec<T>> {
    if v.len() < WENO_MIN_CELLS {
        return Err(Error::GridTooSmall { min: WENO_MIN_CELLS, got: v.len() });
    }
    let mut ext = Vec::with_capacity(v.len() + 6);
    pad(v, ghosts, &mut ext);
    let mut out = vec![T::zero(); v.len() + 1];
    reconstruct_padded(&ext, wind, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_data_is_reproduced() {
        let v = vec![0.7; 10];
        for wind in [Wind::Positive, Wind::Negative] {
            let f = weno5_flux(&v, wind, &Ghosts::Periodic).unwrap();
            assert_eq!(f.len(), 11);
            assert!(f.iter().all(|&x: &f64| (x - 0.7).abs() < 1e-15));
        }
    }

    #[test]
    fn linear_data_gives_exact_interface_values() {
        // cell averages of a linear function equal its center values
        let m = 12;
        let lin = |x: f64| 2.0 - 3.0 * x;
        let v: Vec<f64> = (0..m).map(|j| lin(j as f64 + 0.5)).collect();
        let ghosts = Ghosts::Values {
            left: [lin(-2.5), lin(-1.5), lin(-0.5)],
            right: [lin(m as f64 + 0.5), lin(m as f64 + 1.5), lin(m as f64 + 2.5)],
        };
        for wind in [Wind::Positive, Wind::Negative] {
            let f = weno5_flux(&v, wind, &ghosts).unwrap();
            for (j, fj) in f.iter().enumerate() {
                assert!((fj - lin(j as f64)).abs() < 1e-12, "{wind:?} {j}");
            }
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        assert_eq!(
            weno5_flux(&[1.0; 5], Wind::Positive, &Ghosts::Periodic),
            Err(Error::GridTooSmall { min: 6, got: 5 })
        );
    }

    #[test]
    fn reconstruction_from_cell_averages_is_fifth_order() {
        // averages of sin^2(pi x) over [x_j - dx/2, x_j + dx/2]; exact
        // antiderivative x/2 - sin(2 pi x)/(4 pi)
        let anti = |x: f64| x / 2.0 - (2.0 * PI * x).sin() / (4.0 * PI);
        let exact = |x: f64| (PI * x).sin().powi(2);
        let err = |m: usize| {
            let dx = 1.0 / m as f64;
            let v: Vec<f64> = (0..m)
                .map(|j| (anti((j + 1) as f64 * dx) - anti(j as f64 * dx)) / dx)
                .collect();
            let f = weno5_flux(&v, Wind::Positive, &Ghosts::Periodic).unwrap();
            f.iter()
                .enumerate()
                .map(|(j, fj)| (fj - exact(j as f64 * dx)).abs())
                .fold(0.0, f64::max)
        };
        let e: Vec<f64> = [40, 80, 160].iter().map(|&m| err(m)).collect();
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 4.5, "order {order} from {e:?}");
        }
    }

    #[test]
    fn mirrored_wind_reverses_stencil() {
        let v: Vec<f64> = (0..8).map(|j| ((j * j) % 5) as f64).collect();
        let rev: Vec<f64> = v.iter().rev().copied().collect();
        let fp = weno5_flux(&v, Wind::Positive, &Ghosts::Periodic).unwrap();
        let fn_ = weno5_flux(&rev, Wind::Negative, &Ghosts::Periodic).unwrap();
        for j in 0..=8 {
            assert!((fp[j] - fn_[8 - j]).abs() < 1e-14);
        }
    }
}
