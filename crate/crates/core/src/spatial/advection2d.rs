use std::f64::consts::PI;

use super::weno::{pad, reconstruct_padded, Ghosts, Wind, WENO_MIN_CELLS};
use super::SemiDiscreteProblem;
use crate::error::{Error, Result};
use crate::rhs::{scatter_fluxes, ConservativeRhs, Face, Rhs};
use crate::scalar::Real;

/// Rotating flow `u_t + (a1 u)_x + (a2 u)_y = 0` on the unit square with
/// `a1 = 2 pi (y - 1/2)`, `a2 = -2 pi (x - 1/2)` (one clockwise turn per
/// unit time) and a Gaussian pulse centered at `(1/2, 1/4)`.
///
/// Cells are numbered `j * n + i` with `i` the x index. Faces are all
/// x-faces row by row (`n + 1` per row), then all y-faces column by column.
/// Ghost cells take the exact solution at the evaluation time.
#[derive(Debug, Clone)]
pub struct Advection2D<T> {
    n: usize,
    h: T,
    centers: Vec<T>,
    faces: Vec<Face>,
    widths: Vec<T>,
}

impl<T: Real> Advection2D<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < WENO_MIN_CELLS {
            return Err(Error::GridTooSmall { min: WENO_MIN_CELLS, got: n });
        }
        let h = T::one() / T::count(n);
        let centers = (0..n).map(|i| (T::count(i) + T::lit(0.5)) * h).collect();
        let mut faces = Vec::with_capacity(2 * n * (n + 1));
        for j in 0..n {
            for f in 0..=n {
                faces.push(Face {
                    minus: (f > 0).then(|| j * n + f - 1),
                    plus: (f < n).then(|| j * n + f),
                });
            }
        }
        for i in 0..n {
            for f in 0..=n {
                faces.push(Face {
                    minus: (f > 0).then(|| (f - 1) * n + i),
                    plus: (f < n).then(|| f * n + i),
                });
            }
        }
        Ok(Self { n, h, centers, faces, widths: vec![h; n * n] })
    }

    /// Cells per direction.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn velocity(x: T, y: T) -> (T, T) {
        let two_pi = T::lit(2.0 * PI);
        let half = T::lit(0.5);
        (two_pi * (y - half), -two_pi * (x - half))
    }

    pub fn initial_at(x: T, y: T) -> T {
        let dx = x - T::lit(0.5);
        let dy = y - T::lit(0.25);
        (T::lit(-10.0) * (dx * dx + dy * dy)).exp()
    }

    /// Exact solution: the initial profile rotated clockwise by `2 pi t`.
    pub fn exact_at(x: T, y: T, t: T) -> T {
        let half = T::lit(0.5);
        let (s, c) = (T::lit(2.0 * PI) * t).sin_cos();
        let (px, py) = (x - half, y - half);
        Self::initial_at(half + c * px - s * py, half + s * px + c * py)
    }

    /// Time step for Courant number `nu = 2 pi dt / h`.
    pub fn dt_for_courant(&self, nu: T) -> T {
        nu * self.h / T::lit(2.0 * PI)
    }

    fn midpoints(&self) -> Vec<(f64, f64)> {
        let h = self.h.as_f64();
        let mut out = Vec::with_capacity(self.faces.len());
        for j in 0..self.n {
            for f in 0..=self.n {
                out.push((f as f64 * h, (j as f64 + 0.5) * h));
            }
        }
        for i in 0..self.n {
            for f in 0..=self.n {
                out.push(((i as f64 + 0.5) * h, f as f64 * h));
            }
        }
        out
    }

    fn ghost_coord(&self, g: isize) -> T {
        (T::lit(g as f64) + T::lit(0.5)) * self.h
    }

    /// Fluxes of one grid line. `line[g]` is cell `g` along the line, `speed`
    /// the constant normal velocity and `ghost(g)` the exact value at ghost
    /// index `g` (`-3..0` or `n..n+3`).
    fn line_fluxes(&self, line: &[T], speed: T, ghost: impl Fn(isize) -> T, ext: &mut Vec<T>, out: &mut [T]) {
        let n = self.n as isize;
        let ghosts = Ghosts::Values {
            left: [ghost(-3), ghost(-2), ghost(-1)],
            right: [ghost(n), ghost(n + 1), ghost(n + 2)],
        };
        pad(line, &ghosts, ext);
        let wind = if speed >= T::zero() { Wind::Positive } else { Wind::Negative };
        reconstruct_padded(ext, wind, out);
        for o in out.iter_mut() {
            *o *= speed;
        }
    }
}

impl<T: Real> Rhs<T> for Advection2D<T> {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn eval(&self, t: T, v: &[T], out: &mut [T]) {
        let mut fl = vec![T::zero(); self.faces.len()];
        self.fluxes(t, v, &mut fl);
        out.iter_mut().for_each(|o| *o = T::zero());
        scatter_fluxes(&self.faces, &self.widths, &fl, |_| true, out);
    }
}

impl<T: Real> ConservativeRhs<T> for Advection2D<T> {
    fn faces(&self) -> &[Face] {
        &self.faces
    }

    fn widths(&self) -> &[T] {
        &self.widths
    }

    fn fluxes(&self, t: T, v: &[T], out: &mut [T]) {
        let n = self.n;
        let mut ext = Vec::with_capacity(n + 6);
        let mut line = vec![T::zero(); n];
        for j in 0..n {
            let y = self.centers[j];
            let (speed, _) = Self::velocity(T::zero(), y);
            line.copy_from_slice(&v[j * n..(j + 1) * n]);
            let ghost = |g: isize| Self::exact_at(self.ghost_coord(g), y, t);
            self.line_fluxes(&line, speed, ghost, &mut ext, &mut out[j * (n + 1)..(j + 1) * (n + 1)]);
        }
        let base = n * (n + 1);
        for i in 0..n {
            let x = self.centers[i];
            let (_, speed) = Self::velocity(x, T::zero());
            for (g, l) in line.iter_mut().enumerate() {
                *l = v[g * n + i];
            }
            let ghost = |g: isize| Self::exact_at(x, self.ghost_coord(g), t);
            let dst = &mut out[base + i * (n + 1)..base + (i + 1) * (n + 1)];
            self.line_fluxes(&line, speed, ghost, &mut ext, dst);
        }
    }
}

impl<T: Real> SemiDiscreteProblem<T> for Advection2D<T> {
    fn centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for y in &self.centers {
            for x in &self.centers {
                out.push((x.as_f64(), y.as_f64()));
            }
        }
        out
    }

    fn cell_measures(&self) -> Vec<T> {
        vec![self.h * self.h; self.n * self.n]
    }

    fn initial(&self) -> Vec<T> {
        self.exact(T::zero()).expect("closed form")
    }

    fn face_midpoints(&self) -> Option<Vec<(f64, f64)>> {
        Some(self.midpoints())
    }

    fn exact(&self, t: T) -> Option<Vec<T>> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for &y in &self.centers {
            for &x in &self.centers {
                out.push(Self::exact_at(x, y, t));
            }
        }
        Some(out)
    }
}
