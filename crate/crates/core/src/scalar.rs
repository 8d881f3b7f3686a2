//! Floating-point scalar abstraction for the numeric core.
//!
//! Pixel math, corruption transforms, network training and the score
//! formulas are all generic over [`Scalar`], so the same code runs in f32
//! (the training/checkpoint precision) and f64 (used by tests that need
//! tight tolerances). Concrete aliases live at the crate root.

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Send + Sync + Debug + Display + 'static
{
    /// Lossless conversion of a literal; panics only on NaN-free overflow,
    /// which cannot happen for the in-range constants used in this crate.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
