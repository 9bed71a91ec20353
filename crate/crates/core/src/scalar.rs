//! Floating point abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the solvers are written against: `f32` or `f64`.
///
/// Tolerances in this crate are calibrated for `f64`. [`Scalar::tol`] maps such a
/// tolerance onto the same fraction of the available significant digits of
/// `Self`, so `f64` keeps the value as written and `f32` gets a proportionally
/// looser one.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count or index.
    fn of(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in scalar type")
    }

    /// Rescales an `f64`-calibrated tolerance to this precision.
    fn tol(t64: f64) -> Self;
}

impl Scalar for f64 {
    fn tol(t64: f64) -> Self {
        t64
    }
}

impl Scalar for f32 {
    fn tol(t64: f64) -> Self {
        let digits = t64.ln() / f64::EPSILON.ln();
        (f32::EPSILON as f64).powf(digits) as f32
    }
}

/// Both components finite.
pub(crate) fn finite<T: Scalar>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `e^z` with the modulus flushed to zero once it underflows.
///
/// Strongly damped modes at large `t` otherwise produce `0 * inf` style NaNs when
/// the argument of the oscillating factor is huge.
pub(crate) fn cexp<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    if m == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}
