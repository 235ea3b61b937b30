//! Arithmetic used by the tracer: plain floats with tolerances, or exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt::Debug;

pub trait Scalar: Clone + PartialOrd + Debug + Send + Sync {
    const EXACT: bool;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn scale(&self, k: i64) -> Self;
    fn abs(&self) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn zero() -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, k: i64) -> Self {
        self * k as f64
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    /// Exact conversion: every finite float is a dyadic rational.
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coordinate")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, k: i64) -> Self {
        self * BigRational::from_integer(BigInt::from(k))
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// `true` when `v` is a short dyadic rational (denominator at most `2^24`,
/// magnitude below `2^30`), the inputs for which exact tracing stays cheap.
pub fn is_short_dyadic(v: f64) -> bool {
    let scaled = v * (1u64 << 24) as f64;
    v.abs() < (1u64 << 30) as f64 && scaled.fract() == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_conversion() {
        let r = BigRational::from_f64(0.375);
        assert_eq!(r, BigRational::new(BigInt::from(3), BigInt::from(8)));
        assert_eq!(Scalar::to_f64(&r), 0.375);
        assert!(is_short_dyadic(0.375));
        assert!(!is_short_dyadic(0.1));
        assert!(!is_short_dyadic(1.618_033_988_749_895));
    }
}
