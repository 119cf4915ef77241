//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the library computes in.
///
/// Implemented for `f32` and `f64`. Method calls on values go through
/// [`RealField`] (`exp`, `sqrt`, `abs`, ...).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into this type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `x` as a tolerance, floored at a thousand units of roundoff so that
    /// double-precision defaults stay meaningful in single precision.
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::of(1.0e3);
        Self::of(x).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}
