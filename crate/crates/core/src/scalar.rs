//! Numeric scalar abstraction.
//!
//! Every routine in the crate is written against [`Scalar`], so the same code
//! runs on exact rationals ([`BigRational`]) and on machine floats. Exact
//! rationals are the reference instantiation: the boundary cases that matter
//! here (a bound exactly at zero, a stratum risk exactly one) are only decided
//! reliably without rounding. Float instantiations compare against a small
//! tolerance instead.

use std::fmt::{Debug, Display};

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Magnitude below which a value counts as zero. Zero for exact types.
    fn tolerance() -> Self;

    /// `numer / denom` built from integers.
    fn ratio(numer: i64, denom: i64) -> Self {
        let n = Self::from_i64(numer).expect("integer fits scalar");
        let d = Self::from_i64(denom).expect("integer fits scalar");
        n / d
    }

    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("count fits scalar")
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    /// Strictly above zero, beyond tolerance.
    fn is_strictly_positive(&self) -> bool {
        *self > Self::tolerance()
    }

    /// Strictly below zero, beyond tolerance.
    fn is_strictly_negative(&self) -> bool {
        *self < -Self::tolerance()
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    fn max_with(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_with(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::from_integer(0.into())
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn is_negligible(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-6
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_is_reduced() {
        let r = BigRational::ratio(21, 100);
        assert_eq!(r, BigRational::ratio(42, 200));
        assert!(!r.is_negligible());
        assert!(BigRational::ratio(0, 5).is_negligible());
    }

    #[test]
    fn float_tolerance_absorbs_rounding() {
        let x = 0.1f64 + 0.2;
        assert!(x.approx_eq(&0.3));
        assert!(!(1e-13f64).is_strictly_positive());
        assert!((1e-9f64).is_strictly_positive());
    }

    #[test]
    fn exact_comparisons_have_no_slack() {
        let tiny = BigRational::ratio(1, 1_000_000_000_000);
        assert!(tiny.is_strictly_positive());
        assert!((-tiny.clone()).is_strictly_negative());
        assert!(!tiny.approx_eq(&BigRational::ratio(0, 1)));
    }
}
