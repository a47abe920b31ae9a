//! Numeric scalars shared by the exact and floating-point pipelines.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used by every exact code path.
pub type ExactScalar = BigRational;

/// Field operations needed by the moment/cumulant transforms and Hankel
/// determinants. Implemented for `f64` and [`ExactScalar`].
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    fn from_exact(v: &ExactScalar) -> Self;

    /// Equality check: exact for rationals, relative `1e-12` for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn from_exact(v: &ExactScalar) -> Self {
        Scalar::to_f64(v)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * self.abs().max(other.abs()).max(1.0)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn from_exact(v: &ExactScalar) -> Self {
        v.clone()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
}

/// `num / den` as an exact rational.
pub fn ratio(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it reproduces `x` to a relative `1e-12`.
pub fn rationalize(x: f64, max_den: u64) -> Option<ExactScalar> {
    if !x.is_finite() {
        return None;
    }
    let tol = 1e-12 * x.abs().max(1.0);
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e18 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    if k1 > 0 && (x - h1 as f64 / k1 as f64).abs() <= tol {
        Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)))
    } else {
        None
    }
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn exact_sqrt(q: &ExactScalar) -> Option<ExactScalar> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.7, 100_000), Some(ratio(7, 10)));
        assert_eq!(rationalize(0.15, 100_000), Some(ratio(3, 20)));
        assert_eq!(rationalize(2.0000000000000004, 100_000), Some(ratio(2, 1)));
        assert_eq!(rationalize(-1.25, 100_000), Some(ratio(-5, 4)));
        assert_eq!(rationalize(std::f64::consts::PI, 100_000), None);
    }

    #[test]
    fn exact_sqrt_of_squares() {
        assert_eq!(exact_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(exact_sqrt(&ratio(2, 1)), None);
        assert_eq!(exact_sqrt(&ratio(-4, 1)), None);
    }

    #[test]
    fn powi_handles_negative_exponents() {
        assert_eq!(ratio(2, 3).powi(-3), ratio(27, 8));
        assert_eq!(Scalar::powi(&2.0_f64, 10), 1024.0);
        assert_eq!(ratio(5, 1).powi(0), ratio(1, 1));
    }

    #[test]
    fn float_equality_is_relative() {
        assert!(0.7_f64.approx_eq(&(0.7 + 1e-15)));
        assert!(!0.7_f64.approx_eq(&0.7001));
        assert!(!ratio(7, 10).approx_eq(&ratio(70001, 100000)));
    }
}
