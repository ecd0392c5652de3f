//! Scalar abstraction for the numeric core.
//!
//! All model math is written against [`Scalar`] so the same code runs in
//! f32 or f64. Training and the verification harness use f64 (see the
//! crate-root aliases); f32 exists for smaller checkpoints and as a check
//! that nothing depends on a concrete float type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar used throughout the model core.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lift an f64 constant (hyperparameter, literal) into this type.
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("constant not representable")
    }

    /// Lossy view as f64 for logging and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
