//! Right-hand side abstractions shared by the spatial discretizations, the
//! decompositions and the stepper.

use crate::scalar::Real;

/// A semi-discrete right-hand side `F(t, v)`.
pub trait Rhs<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// Writes `F(t, v)` into `out`.
    fn eval(&self, t: T, v: &[T], out: &mut [T]);
}

/// One cell interface of a conservative discretization.
///
/// A positive flux moves mass from `minus` to `plus`; `None` marks the
/// outside of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub minus: Option<usize>,
    pub plus: Option<usize>,
}

/// A right-hand side in conservative form `F(v) = H^{-1} D Phi(v)`.
pub trait ConservativeRhs<T: Real>: Rhs<T> {
    /// Interface list; `fluxes` writes one value per face in this order.
    fn faces(&self) -> &[Face];

    /// Cell measures `h_j` (the diagonal of `H`).
    fn widths(&self) -> &[T];

    fn fluxes(&self, t: T, v: &[T], out: &mut [T]);
}

/// Accumulates `H^{-1} D Phi` for the faces selected by `keep` into `out`.
///
/// `out` is not cleared.
pub fn scatter_fluxes<T: Real>(
    faces: &[Face],
    widths: &[T],
    fluxes: &[T],
    keep: impl Fn(usize) -> bool,
    out: &mut [T],
) {
    for (f, (face, &flux)) in faces.iter().zip(fluxes).enumerate() {
        if !keep(f) {
            continue;
        }
        if let Some(i) = face.minus {
            out[i] -= flux / widths[i];
        }
        if let Some(i) = face.plus {
            out[i] += flux / widths[i];
        }
    }
}

/// Adapts a closure `(t, v, out)` to [`Rhs`].
pub struct FnRhs<F> {
    dim: usize,
    f: F,
}

impl<F> FnRhs<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F> Rhs<T> for FnRhs<F>
where
    F: Fn(T, &[T], &mut [T]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: T, v: &[T], out: &mut [T]) {
        (self.f)(t, v, out)
    }
}

impl<T: Real, R: Rhs<T> + ?Sized> Rhs<T> for &R {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, t: T, v: &[T], out: &mut [T]) {
        (**self).eval(t, v, out)
    }
}

impl<T: Real, R: ConservativeRhs<T> + ?Sized> ConservativeRhs<T> for &R {
    fn faces(&self) -> &[Face] {
        (**self).faces()
    }

    fn widths(&self) -> &[T] {
        (**self).widths()
    }

    fn fluxes(&self, t: T, v: &[T], out: &mut [T]) {
        (**self).fluxes(t, v, out)
    }
}

/// Weighted sum `h^T v`; with cell measures as weights this is the mass.
pub fn mass<T: Real>(h: &[T], v: &[T]) -> crate::error::Result<T> {
    if h.len() != v.len() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: h.len(),
            got: v.len(),
        });
    }
    Ok(h.iter().zip(v).map(|(&a, &b)| a * b).sum())
}
