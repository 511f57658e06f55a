//! Exact rational arithmetic for evaluation metrics.
//!
//! Confusion rates are ratios of small integer counts. Keeping them as
//! reduced fractions lets oracle-equality tests assert with zero tolerance;
//! conversion to `f64` happens only at display time.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// A nonnegative rational number kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Ratio {
    /// Construct `num/den` reduced to lowest terms. Panics on a zero
    /// denominator; rates with an empty denominator are represented as
    /// `Option<Ratio>::None` by callers instead.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn zero() -> Self {
        Ratio { num: 0, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact sum; u128 intermediates keep desk-scale metrics from
    /// overflowing.
    pub fn add(self, other: Ratio) -> Ratio {
        let num = u128::from(self.num) * u128::from(other.den)
            + u128::from(other.num) * u128::from(self.den);
        let den = u128::from(self.den) * u128::from(other.den);
        Self::from_u128(num, den)
    }

    /// Exact division by a positive integer count (used for means).
    pub fn div_int(self, k: u64) -> Ratio {
        assert!(k != 0, "division by zero count");
        Self::from_u128(u128::from(self.num), u128::from(self.den) * u128::from(k))
    }

    fn from_u128(num: u128, den: u128) -> Ratio {
        let g = gcd128(num, den).max(1);
        let (num, den) = (num / g, den / g);
        assert!(
            num <= u128::from(u64::MAX) && den <= u128::from(u64::MAX),
            "ratio overflow: {num}/{den}"
        );
        Ratio {
            num: num as u64,
            den: den as u64,
        }
    }
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.num) * u128::from(other.den);
        let rhs = u128::from(other.num) * u128::from(self.den);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        assert_eq!(Ratio::new(2, 4), Ratio::new(1, 2));
        assert_eq!(Ratio::new(0, 7), Ratio::zero());
    }

    #[test]
    fn exact_mean_of_fractions() {
        // mean(2%, 4%) = 3%
        let mean = Ratio::new(2, 100).add(Ratio::new(4, 100)).div_int(2);
        assert_eq!(mean, Ratio::new(3, 100));
    }

    #[test]
    fn ordering_is_cross_multiplied() {
        assert!(Ratio::new(1, 3) < Ratio::new(1, 2));
        assert!(Ratio::new(2, 6) == Ratio::new(1, 3));
    }
}
