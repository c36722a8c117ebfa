//! Floating point type used for code lengths.
use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// A code length in bits.
///
/// Timestamps and counts stay integral; only lengths are generic.
pub trait Bits:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + serde::Serialize + 'static
{
    fn of(n: i64) -> Self {
        Self::from_i64(n).expect("integer fits in float")
    }

    /// `log2(n)` of a positive integer.
    fn lg(n: i64) -> Self {
        Self::of(n).log2()
    }

    fn to_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Bits for f32 {}
impl Bits for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lg_matches_std() {
        assert_eq!(<f64 as Bits>::lg(8), 3.0);
        assert!((<f32 as Bits>::lg(35) - 35f32.log2()).abs() < 1e-6);
    }
}
