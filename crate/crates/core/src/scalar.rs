//! Scalar traits.
//!
//! Everything that integrates or analyses a semi-discrete system is generic
//! over [`Real`] (in practice `f32` or `f64`). Tableau coefficients are
//! generic over [`Coefficient`], which is also implemented for exact
//! rationals so that the structural property checks can be exact.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_rational::Rational64;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast};

/// Floating point type used for states, right-hand sides and matrices.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumCast
    + nalgebra::Scalar
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumCast
        + nalgebra::Scalar
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Display
        + LowerExp
        + Send
        + Sync
{
}

/// A field element usable as a Runge-Kutta coefficient.
///
/// Rationals compare exactly; floating point types compare with a fixed
/// absolute tolerance (coefficients are O(1)).
pub trait Coefficient: Num + Neg<Output = Self> + Clone + PartialEq + Debug + Display {
    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn approx_eq(&self, other: &Self) -> bool;

    fn to_f64(&self) -> f64;

    /// Parses `p/q`, an integer, or (for floating point types) a decimal.
    fn parse_coefficient(text: &str) -> Option<Self>;

    fn is_zero_coeff(&self) -> bool {
        self.approx_eq(&Self::zero())
    }
}

impl Coefficient for Rational64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational64::new(numer, denom)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn parse_coefficient(text: &str) -> Option<Self> {
        let text = text.trim();
        match text.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().ok()?;
                let d: i64 = d.trim().parse().ok()?;
                (d != 0).then(|| Rational64::new(n, d))
            }
            None => text.parse::<i64>().ok().map(Rational64::from_integer),
        }
    }
}

/// Absolute tolerance for floating point coefficient identities.
pub const F64_COEFF_TOL: f64 = 1e-14;
const F32_COEFF_TOL: f32 = 1e-6;

macro_rules! float_coefficient {
    ($t:ty, $tol:expr) => {
        impl Coefficient for $t {
            fn from_ratio(numer: i64, denom: i64) -> Self {
                numer as $t / denom as $t
            }

            fn approx_eq(&self, other: &Self) -> bool {
                (self - other).abs() <= $tol
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn parse_coefficient(text: &str) -> Option<Self> {
                let text = text.trim();
                match text.split_once('/') {
                    Some((n, d)) => {
                        let n: $t = n.trim().parse().ok()?;
                        let d: $t = d.trim().parse().ok()?;
                        (d != 0.0).then(|| n / d)
                    }
                    None => text.parse().ok(),
                }
            }
        }
    };
}

float_coefficient!(f64, F64_COEFF_TOL);
float_coefficient!(f32, F32_COEFF_TOL);
