//! Scalar abstraction for the physics and modem code.
//!
//! Everything numeric in this crate is written against [`Real`] so the model
//! can run in `f32` or `f64`. The Monte-Carlo modem needs a little more than
//! plain float arithmetic (FFTs and Gaussian sampling), which is what
//! [`SimScalar`] adds.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar the analytical model is generic over.
pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
{
    /// Converts an `f64` literal (physical constant, tolerance, table value)
    /// into `Self`. Panics only if the value is not representable at all,
    /// which cannot happen for the finite constants used in this crate.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 constant")
    }

    /// Converts `self` to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalar usable by the Monte-Carlo modem: [`Real`] plus FFT support and
/// standard-normal sampling.
pub trait SimScalar: Real + rustfft::FftNum {
    /// Draws one standard-normal sample from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl SimScalar for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl SimScalar for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}
