//! Scalar abstraction: every probability, distance and statistic in this
//! crate is generic over [`Real`], so the whole engine runs at f32 or f64.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Lossy conversion from f64 literals and intermediates.
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 convertible to scalar")
}

pub fn from_u32<F: Real>(x: u32) -> F {
    F::from_u32(x).expect("u32 convertible to scalar")
}

pub fn from_usize<F: Real>(x: usize) -> F {
    F::from_usize(x).expect("usize convertible to scalar")
}
