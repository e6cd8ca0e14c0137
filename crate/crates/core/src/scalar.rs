//! Floating-point abstraction for the numeric core.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Scalar type the numeric core is generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + 'static {
    /// Lossy conversion from `f64`, used for constants and tolerances.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
