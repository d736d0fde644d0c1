//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the AHP routines are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances that depend on the precision
/// (power-iteration convergence, normalization checks) are exposed here so
/// algorithms can stay precision agnostic.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Relative tolerance used to stop the power iteration.
    const EIGEN_TOLERANCE: f64;
    /// Tolerance for "sums to one" / "multiplies to one" checks.
    const NORMALIZATION_TOLERANCE: f64;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal is representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("dimension is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    const EIGEN_TOLERANCE: f64 = 1e-6;
    const NORMALIZATION_TOLERANCE: f64 = 1e-5;
}

impl Scalar for f64 {
    const EIGEN_TOLERANCE: f64 = 1e-10;
    const NORMALIZATION_TOLERANCE: f64 = 1e-12;
}

/// Sum with Neumaier compensation. Used wherever a result must sum to one
/// within a few ulps.
pub fn compensated_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry = carry + ((sum - t) + v);
        } else {
            carry = carry + ((v - t) + sum);
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive_on_cancellation() {
        let xs = [1.0f64, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn literals_round_trip() {
        assert_eq!(f32::lit(0.5), 0.5f32);
        assert_eq!(f64::from_usize_lossy(7), 7.0);
    }
}
