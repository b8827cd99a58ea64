use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used by the feature and LLR kernels: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 converts to every Scalar")
    }

    /// Lossy conversion to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("every Scalar converts to f64")
    }

    /// Total order used where summation order must not depend on input order.
    fn total_cmp_scalar(&self, other: &Self) -> std::cmp::Ordering;
}

impl Scalar for f32 {
    fn total_cmp_scalar(&self, other: &Self) -> std::cmp::Ordering {
        self.total_cmp(other)
    }
}

impl Scalar for f64 {
    fn total_cmp_scalar(&self, other: &Self) -> std::cmp::Ordering {
        self.total_cmp(other)
    }
}
