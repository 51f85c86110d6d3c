//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the solver stack is generic over (`f32` or `f64`).
///
/// Only the nalgebra `RealField` method set is used on values so that calls
/// stay unambiguous; `num-traits` supplies the literal and export conversions.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or data value.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a count.
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self {
        Self::default_epsilon()
    }

    /// Default stopping tolerance: `1e-8`, raised to `100 * eps` for types
    /// that cannot resolve it.
    fn default_tolerance() -> Self {
        let floor = Self::eps() * Self::lit(100.0);
        let target = Self::lit(1e-8);
        if floor > target {
            floor
        } else {
            target
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
