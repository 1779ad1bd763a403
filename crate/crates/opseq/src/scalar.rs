//! Scalar rings: exact rationals (the correctness reference) and binary64
//! floats (for benchmarks and larger indices).

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar, always stored in lowest terms with positive
/// denominator (`num_rational` normalizes on construction).
pub type Rat = BigRational;

/// Default relative comparison tolerance in float mode.
pub const DEFAULT_FLOAT_TOL: f64 = 1e-10;

/// Relative commutator tolerance in float mode; exact mode uses zero.
pub const FLOAT_COMMUTATOR_TOL: f64 = 1e-9;

/// Element of the active coefficient ring.
///
/// `Complex64` also implements the trait so the spectral module can reuse the
/// dense matrix type internally; complex values never appear in public
/// outputs.
pub trait Scalar: Clone + PartialEq + Debug + Display + Send + Sync + 'static {
    /// True when arithmetic in this ring is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Embed an arbitrary-precision integer. Exact in `Rat`; rounds in float
    /// mode (callers flag values above 2^53).
    fn from_bigint(v: &BigInt) -> Self;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Magnitude as f64, used by norms and tolerance scaling.
    fn abs_f64(&self) -> f64;
    /// Canonical text form: `p/q` in exact mode, 17 significant digits in
    /// float mode (reproducible diffs).
    fn render(&self) -> String;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        Rat::from_integer(v.clone())
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_f64(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
    fn render(&self) -> String {
        format!("{:.16e}", self)
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_bigint(v: &BigInt) -> Self {
        Complex64::new(v.to_f64().unwrap_or(f64::INFINITY), 0.0)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn abs_f64(&self) -> f64 {
        self.norm()
    }
    fn render(&self) -> String {
        format!("{:.16e}{:+.16e}i", self.re, self.im)
    }
}

/// Relative closeness test used throughout float mode:
/// `|a - b| <= tol * (1 + max(|a|, |b|))`.
pub fn approx_eq_f64(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_is_reduced_with_positive_denominator() {
        let x = Rat::new(BigInt::from(4), BigInt::from(-6));
        assert_eq!(x.numer(), &BigInt::from(-2));
        assert_eq!(x.denom(), &BigInt::from(3));
        assert_eq!(x.render(), "-2/3");
        assert_eq!(Rat::from_i64(7).render(), "7");
    }

    #[test]
    fn float_render_is_17_significant_digits() {
        assert_eq!(55.0f64.render(), "5.5000000000000000e1");
    }

    #[test]
    fn approx_eq_is_relative() {
        assert!(approx_eq_f64(1e12, 1e12 + 1.0, 1e-10));
        assert!(!approx_eq_f64(1.0, 1.1, 1e-10));
    }
}
