//! Scalar abstractions shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Field-like scalar: enough for products, ratios and comparisons.
///
/// Implemented for `f32`, `f64` and [`crate::Rational`].
pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug {}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + FromPrimitive + Debug {}

/// Floating-point scalar for code that needs `sqrt`, `floor` and friends.
pub trait Real: Float + Scalar + ToPrimitive + Display + Default + Send + Sync + 'static {}

impl<T> Real for T where T: Float + Scalar + ToPrimitive + Display + Default + Send + Sync + 'static {}

/// Converts a count into the scalar type. Counts used in this crate are far
/// below the point where any supported scalar loses integers.
pub(crate) fn from_count<T: FromPrimitive>(n: u64) -> T {
    T::from_u64(n).expect("count representable in scalar type")
}
