//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
    + crate::star_matrix::Entry<Real = Self>
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance that is `target` in double precision and never below a few
    /// hundred ulps of the scalar type.
    #[inline]
    fn tolerance(target: f64) -> Self {
        Self::lit(target).max(Self::epsilon() * Self::lit(256.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Numerically stable `ln(sech(z))`.
pub(crate) fn ln_sech<T: Real>(z: T) -> T {
    let a = z.abs();
    let two = T::lit(2.0);
    -(a + (-(two * a)).exp().ln_1p() - T::LN_2())
}

/// Numerically stable `ln(csch(z))` for `z > 0`.
pub(crate) fn ln_csch<T: Real>(z: T) -> T {
    let two = T::lit(2.0);
    -(z + (-(-(two * z)).exp_m1()).ln() - T::LN_2())
}
