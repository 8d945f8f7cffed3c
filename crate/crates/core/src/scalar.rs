//! Scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type the library is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts an index or count.
    #[inline]
    fn idx(n: usize) -> Self {
        Self::from_usize(n).expect("index representable")
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }

    /// Lossy conversion used for reporting.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|a|` with the sign of `b`.
#[inline]
pub(crate) fn copysign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// `(-1)^n` for a signed integer.
#[inline]
pub(crate) fn sign_pow<T: Real>(n: i64) -> T {
    if n.rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    }
}
