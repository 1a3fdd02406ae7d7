//! Floating point abstraction used by the numeric layers.
//!
//! Every analysis routine is generic over [`Scalar`] so the same code runs on
//! `f32` and `f64`. Concrete `f64` aliases live at the crate root.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the analysis layers operate on.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + NumAssign + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the target type cannot represent finite `f64` values at
/// all, which no implementor of [`Scalar`] exhibits.
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant must convert into the scalar type")
}

/// Converts a count into the working scalar type.
pub fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("usize must convert into the scalar type")
}
