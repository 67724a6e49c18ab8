//! Scalar abstraction: the whole calculus is written against `Scalar`
//! so it runs on `f32` or `f64`; the crate-root aliases fix `f64`.

use num_traits::{Float, NumCast, ToPrimitive};

pub trait Scalar:
    Float + NumCast + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Conversion from `f64`, used when deterministic `f64` sources
    /// (samplers, schedulers) feed a generic computation.
    fn from_f64(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("finite f64 converts to any scalar")
    }

    /// Conversion to `f64` for reporting and cross-checks.
    fn into_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
