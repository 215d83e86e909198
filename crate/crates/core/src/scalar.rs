use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

/// Field-like number type the closed-form estimators are written against.
///
/// Implemented for every type with field arithmetic, an ordering and a
/// conversion from integer counts: `f32`, `f64` and `num_rational::Ratio`.
pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug {
    /// Converts a tally into the scalar type.
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count not representable in scalar type")
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T: Num + Clone + PartialOrd + FromPrimitive + Debug> Scalar for T {}

/// Scalars that also support square roots and the rest of IEEE float math.
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}
