//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the library is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Pivot and feasibility tolerance used by the exact linear solvers.
    fn solver_tolerance() -> Self;
}

impl Scalar for f32 {
    fn solver_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn solver_tolerance() -> Self {
        1e-11
    }
}

/// Euclidean dot product.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `x^r` with shortcuts for the exponents that dominate the hot loops.
#[inline]
pub(crate) fn pow<T: Scalar>(x: T, r: T) -> T {
    if r == T::lit(2.0) {
        x * x
    } else if r == T::lit(3.0) {
        x * x * x
    } else if r == T::lit(4.0) {
        let y = x * x;
        y * y
    } else if r == T::lit(0.5) {
        x.sqrt()
    } else {
        x.powf(r)
    }
}
