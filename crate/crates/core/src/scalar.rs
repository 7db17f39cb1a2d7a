//! Numeric backends.
//!
//! Every computation in the crate is generic over [`Field`], which has two
//! implementations: [`Exact`] (arbitrary-precision rationals, the verification
//! backend) and [`Approx`] (binary64 floats compared with a relative
//! tolerance). Because the backend is a type parameter, exact and approximate
//! values cannot meet inside a computation. [`Scalar`] is the type-erased form
//! used at the edges (reports, serialization, CLI), and its checked arithmetic
//! rejects mode mixing at runtime.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational backend.
pub type Exact = BigRational;

/// Default relative tolerance for approximate comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Arithmetic mode of a value or a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approximate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Approximate => f.write_str("approximate"),
        }
    }
}

/// An ordered field with the handful of extra operations the crate needs.
pub trait Field:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn recip(&self) -> Self;
    fn powi(&self, exp: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Natural log of the magnitude, finite for any nonzero value.
    fn ln_abs(&self) -> f64;

    /// Equality: bit-exact for [`Exact`], relative tolerance `tol` for [`Approx`].
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    /// The dyadic value `bits / 2^53`, represented without rounding.
    fn from_unit_bits(bits: u64) -> Self;

    /// Smallest `t` in `0..=2^53` with `b < t <=> from_unit_bits(b) < self`
    /// for every `b < 2^53`, i.e. `ceil(self · 2^53)` clamped to that range.
    fn unit_threshold(&self) -> u64;

    fn to_scalar(&self) -> Scalar;

    /// Parse a literal accepted by this backend (see [`parse_rational`]).
    fn parse_literal(field: &'static str, input: &str) -> Result<Self>;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

fn biguint_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

impl Field for BigRational {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn recip(&self) -> Self {
        num_rational::Ratio::recip(self)
    }
    fn powi(&self, exp: i64) -> Self {
        let base = if exp < 0 { Field::recip(self) } else { self.clone() };
        num_traits::pow(base, exp.unsigned_abs() as usize)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn ln_abs(&self) -> f64 {
        biguint_ln(self.numer().magnitude()) - biguint_ln(self.denom().magnitude())
    }
    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn from_unit_bits(bits: u64) -> Self {
        BigRational::new(BigInt::from(bits), BigInt::from(1u64 << 53))
    }
    fn unit_threshold(&self) -> u64 {
        let scaled = (self * BigRational::from_integer(BigInt::from(1u64 << 53))).ceil().to_integer();
        scaled.clamp(BigInt::zero(), BigInt::from(1u64 << 53)).to_u64().expect("clamped to 2^53")
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }
    fn parse_literal(field: &'static str, input: &str) -> Result<Self> {
        parse_rational(field, input)
    }
}

/// Binary64 backend with relative-tolerance comparison.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Approx(pub f64);

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! approx_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Approx {
            type Output = Approx;
            fn $m(self, rhs: Approx) -> Approx {
                Approx(self.0 $op rhs.0)
            }
        }
    };
}
approx_binop!(Add, add, +);
approx_binop!(Sub, sub, -);
approx_binop!(Mul, mul, *);
approx_binop!(Div, div, /);

impl Neg for Approx {
    type Output = Approx;
    fn neg(self) -> Approx {
        Approx(-self.0)
    }
}

/// Relative comparison `|a - b| <= tol * max(|a|, |b|)`.
pub fn relative_eq(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

impl Field for Approx {
    const MODE: Mode = Mode::Approximate;

    fn zero() -> Self {
        Approx(0.0)
    }
    fn one() -> Self {
        Approx(1.0)
    }
    fn from_i64(v: i64) -> Self {
        Approx(v as f64)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Approx(num as f64 / den as f64)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn is_positive(&self) -> bool {
        self.0 > 0.0
    }
    fn recip(&self) -> Self {
        Approx(1.0 / self.0)
    }
    fn powi(&self, exp: i64) -> Self {
        Approx(self.0.powi(exp as i32))
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn ln_abs(&self) -> f64 {
        self.0.abs().ln()
    }
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        relative_eq(self.0, other.0, tol)
    }
    fn from_unit_bits(bits: u64) -> Self {
        Approx(bits as f64 / (1u64 << 53) as f64)
    }
    fn unit_threshold(&self) -> u64 {
        (self.0 * (1u64 << 53) as f64).ceil().clamp(0.0, (1u64 << 53) as f64) as u64
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::Approx {
            value: self.0,
            tol: DEFAULT_TOL,
        }
    }
    fn parse_literal(field: &'static str, input: &str) -> Result<Self> {
        let s = input.trim();
        if is_decimal_literal(s) {
            return s.parse::<f64>().map(Approx).map_err(|e| Error::Parse {
                field,
                input: input.to_string(),
                reason: e.to_string(),
            });
        }
        parse_rational(field, s).map(|r| Approx(Field::to_f64(&r)))
    }
}

/// True when `s` looks like a decimal or scientific float rather than an
/// integer or `a/b` rational.
pub fn is_decimal_literal(s: &str) -> bool {
    let s = s.trim();
    !s.contains('/') && (s.contains('.') || s.contains('e') || s.contains('E'))
}

/// Parse `a/b` or an integer into an exact rational. Decimal literals are
/// rejected: exact mode never rounds its input.
pub fn parse_rational(field: &'static str, input: &str) -> Result<BigRational> {
    let s = input.trim();
    let err = |reason: &str| Error::Parse {
        field,
        input: input.to_string(),
        reason: reason.to_string(),
    };
    if is_decimal_literal(s) {
        return Err(err("decimal literals require approximate mode; use a/b"));
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| err("numerator is not an integer"))?;
    let den = BigInt::from_str(den).map_err(|_| err("denominator is not an integer"))?;
    if Zero::is_zero(&den) {
        return Err(err("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// A type-erased value: an exact rational or a float with its comparison
/// tolerance.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Approx { value: f64, tol: f64 },
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Approx { .. } => Mode::Approximate,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => Field::to_f64(r),
            Scalar::Approx { value, .. } => *value,
        }
    }

    fn combine(
        &self,
        other: &Scalar,
        exact: impl FnOnce(&BigRational, &BigRational) -> BigRational,
        approx: impl FnOnce(f64, f64) -> f64,
    ) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(exact(a, b))),
            (Scalar::Approx { value: a, tol: ta }, Scalar::Approx { value: b, tol: tb }) => {
                Ok(Scalar::Approx {
                    value: approx(*a, *b),
                    tol: ta.max(*tb),
                })
            }
            _ => Err(Error::ModeMix),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        self.combine(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.combine(other, |a, b| a - b, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.combine(other, |a, b| a * b, |a, b| a * b)
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        if match other {
            Scalar::Exact(b) => Zero::is_zero(b),
            Scalar::Approx { value, .. } => *value == 0.0,
        } {
            return Err(Error::invalid("divisor", "division by zero"));
        }
        self.combine(other, |a, b| a / b, |a, b| a / b)
    }

    /// Bit-exact equality in exact mode, relative tolerance otherwise.
    pub fn approx_eq(&self, other: &Scalar) -> Result<bool> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(a == b),
            (Scalar::Approx { value: a, tol: ta }, Scalar::Approx { value: b, tol: tb }) => {
                Ok(relative_eq(*a, *b, ta.max(*tb)))
            }
            _ => Err(Error::ModeMix),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Approx { value, .. } => write!(f, "{value}"),
        }
    }
}
