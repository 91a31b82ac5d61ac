//! Explicit partitioned and multirate Runge-Kutta time stepping for
//! semi-discrete conservation laws.
//!
//! A right-hand side `F` is split as `F = F_1 + ... + F_r`, either by cells
//! (`F_k = I_k F`) or by fluxes, and advanced with a tableau that has one
//! coefficient set `(A_k, b_k)` per part. The [`analysis`] module builds the
//! linear error operators of such a scheme; [`harness`] drives the
//! convergence, conservation and stability experiments.
//!
//! ```
//! use prk::{builtin_tableau, Stepper64};
//! use prk::decomposition::{CellPartition, CellSplit};
//! use prk::spatial::Advection1D;
//! use prk::stepper::{integrate, IntegrationRun};
//! use prk::spatial::SemiDiscreteProblem;
//!
//! let problem = Advection1D::<f64>::new(64).unwrap();
//! let partition = CellPartition::two_region(64, |i| i >= 32);
//! let mut split = CellSplit::new(&problem, partition).unwrap();
//! let mut stepper = Stepper64::new(&builtin_tableau("TW2").unwrap());
//! let run = IntegrationRun::new(0.0, 0.25, 32);
//! let out = integrate(&mut stepper, &mut split, &problem.initial(), &run).unwrap();
//! assert_eq!(out.state.len(), 64);
//! ```

pub mod analysis;
pub mod decomposition;
pub mod error;
pub mod harness;
pub mod rhs;
pub mod scalar;
pub mod spatial;
pub mod stepper;
pub mod tableau;

pub use error::{Error, Result};
pub use scalar::{Coefficient, Real};
pub use tableau::{builtin_tableau, PrkTableau};

use num_rational::Rational64;

/// Tableau with exact rational coefficients.
pub type Tableau = PrkTableau<Rational64>;
pub type Tableau64 = PrkTableau<f64>;
pub type Stepper64 = stepper::PrkStepper<f64>;
pub type Stepper32 = stepper::PrkStepper<f32>;
pub type Matrix64 = nalgebra::DMatrix<f64>;
pub type Vector64 = nalgebra::DVector<f64>;
pub type Splitting64 = analysis::LinearSplitting<f64>;
pub type ErrorOperators64 = analysis::ErrorOperators<f64>;
