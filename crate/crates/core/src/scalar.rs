//! Scalar abstraction for the simulator core.
//!
//! All physics code is generic over [`Real`], which is implemented for `f32`
//! and `f64`. Concrete `f64` aliases for the main types live at the crate
//! root. Tolerances quoted elsewhere in the crate assume `f64`; `f32` runs
//! are possible but give correspondingly coarser results.

use std::fmt;
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the core.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal not representable in scalar type")
    }

    /// Lossy conversion back to `f64`, mainly for diagnostics.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Default
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Sum
        + Send
        + Sync
        + 'static
{
}

/// Complex number over the core scalar.
pub type C<T> = Complex<T>;

/// `re + 0i` as a complex scalar.
pub fn cre<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `sqrt(n)` for a basis-label integer, used in ladder-operator weights.
pub fn sqrt_usize<T: Real>(n: usize) -> T {
    T::of(n as f64).sqrt()
}
