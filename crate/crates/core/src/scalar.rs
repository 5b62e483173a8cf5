//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point scalar: f32 or f64.
///
/// Every numerical routine in the crate is written against this bound so the
/// same code can run in single precision for quick sweeps and in double
/// precision where oracle tolerances (1e-9 and tighter) matter.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an f64 literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two_pi() -> Self {
        Self::PI() + Self::PI()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

pub fn db10<T: Real>(linear: T) -> T {
    T::lit(10.0) * linear.log10()
}

pub fn from_db10<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_limits() {
        assert_eq!(sinc(0.0_f64), 1.0);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-15);
        assert!((sinc(1e-9_f32) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn db_round_trip() {
        let x = 123.456_f64;
        assert!((from_db10(db10(x)) - x).abs() < 1e-10);
    }
}
