//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point type the controller math is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in the target float type")
    }

    /// Converts `self` into `f64` (used for error payloads and reporting).
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self {
        Self::default_epsilon()
    }

    /// `max(a, b)` without NaN propagation subtleties.
    fn maxr(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `min(a, b)`.
    fn minr(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_two_pi<T: Real>(angle: T) -> T {
    let tau = T::two_pi();
    let r = angle % tau;
    if r < T::zero() {
        r + tau
    } else {
        r
    }
}
