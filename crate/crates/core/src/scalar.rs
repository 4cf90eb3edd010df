//! Scalar abstraction for the probability engine.
//!
//! Estimators, the exhaustive oracle, and the score formulas are written once
//! against [`Scalar`] and instantiated with `f64` for everyday use or with
//! [`BigRational`] when a test needs results that are exact rather than
//! within a tolerance.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts a finite float. Rationals convert exactly (every finite
    /// binary float is a dyadic rational).
    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn clamp_unit(self) -> Self {
        Self::min_of(Self::max_of(self, Self::zero()), Self::one())
    }

    fn abs_diff(&self, other: &Self) -> Self {
        if self > other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }
}

impl Scalar for f64 {
    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn from_f64(value: f64) -> Self {
        value as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_f64(value: f64) -> Self {
        BigRational::from_float(value).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        // Ratio::to_f64 handles big numerators/denominators gracefully.
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_positive() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// Sums an iterator of scalars left to right.
pub fn sum<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use num_traits::One;

    use super::*;

    #[test]
    fn rational_round_trip_is_exact() {
        let r = BigRational::from_f64(0.1);
        assert_eq!(Scalar::to_f64(&r), 0.1);
        let half = BigRational::from_f64(0.5);
        assert_eq!(half.clone() + half, BigRational::one());
    }

    #[test]
    fn clamp_unit_bounds() {
        assert_eq!((-0.5f64).clamp_unit(), 0.0);
        assert_eq!(1.5f64.clamp_unit(), 1.0);
        assert_eq!(0.25f64.clamp_unit(), 0.25);
    }
}
