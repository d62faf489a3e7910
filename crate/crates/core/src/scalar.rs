//! Floating point abstraction shared by the numerical core.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the solver is generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Three-argument minmod: the argument of smallest magnitude when all share a
/// sign, zero otherwise.
#[inline]
pub fn minmod3<T: Real>(a: T, b: T, c: T) -> T {
    let zero = T::zero();
    let lo = fmin(fmin(a, b), c);
    let hi = fmax(fmax(a, b), c);
    if lo > zero {
        lo
    } else if hi < zero {
        hi
    } else {
        zero
    }
}

/// `min` without the NaN bookkeeping of [`Float::min`].
#[inline]
pub fn fmin<T: Real>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}

#[inline]
pub fn fmax<T: Real>(a: T, b: T) -> T {
    if a > b {
        a
    } else {
        b
    }
}
