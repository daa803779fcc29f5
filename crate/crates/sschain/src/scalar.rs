//! Scalar abstraction for the numeric kernels.
//!
//! Everything in this crate is generic over [`Real`], a floating-point scalar
//! backed by `num-traits`. `f32` and `f64` implement it; the accuracy contracts
//! quoted throughout the documentation are stated for `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` constant into the working scalar.
///
/// Infallible for `f32`/`f64` (out-of-range values saturate to infinity,
/// which the callers treat like any other overflow).
#[inline]
pub(crate) fn cst<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant converts into every Real scalar")
}

/// Lossy view of a scalar as `f64`, for diagnostics and error payloads.
#[inline]
pub(crate) fn as_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
