//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real floating-point type the solvers are generic over (`f32` or `f64`).
///
/// Tolerances quoted throughout the crate (1e-10 and tighter) assume `f64`;
/// `f32` instantiations work but converge only to single precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Display + LowerExp + Debug + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in the scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon as an `f64`, for scaling round-off tolerances.
    fn unit_roundoff() -> f64 {
        Self::epsilon().as_f64()
    }
}

impl Real for f32 {}
impl Real for f64 {}
