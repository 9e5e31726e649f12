//! Exact rationals, p-adic valuations and absolute values.
//!
//! Absolute values are never floating point: `|x|_p` is carried as the
//! exponent `e` with `|x|_p = p^e`, and `|x|_inf` as an exact [`Rational`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::primes::{factorize, is_prime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("negative input {0} to integer square root")]
    NegativeSqrt(BigInt),
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

/// An exact fraction in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, ArithError> {
        let den = den.into();
        if den.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn square(&self) -> Self {
        Rational(&self.0 * &self.0)
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self, ArithError> {
        if other.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        Rational::one().checked_div(self)
    }

    /// `self^k` for a (possibly negative) integer exponent.
    pub fn pow(&self, k: i64) -> Result<Self, ArithError> {
        if k < 0 {
            if self.is_zero() {
                return Err(ArithError::DivisionByZero);
            }
            return Ok(Rational(self.0.pow(k as i32)));
        }
        Ok(Rational(self.0.pow(k as i32)))
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

/// `num / den` normalized; the small-integer front door used throughout tests.
pub fn rat(num: i64, den: i64) -> Result<Rational, ArithError> {
    Rational::new(num, den)
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($tr::$method(self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// Panics on a zero divisor, like integer division; use `checked_div` when
// the divisor is not known to be nonzero.
impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ArithError;

    /// Accepts `m`, `m/d`, with an optional leading `-` or `−` (U+2212).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(s.to_string());
        let t = s.trim();
        let (negative, body) = if let Some(rest) = t.strip_prefix('-') {
            (true, rest)
        } else if let Some(rest) = t.strip_prefix('\u{2212}') {
            (true, rest)
        } else {
            (false, t)
        };
        let parse_digits = |part: &str| -> Result<BigInt, ArithError> {
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            BigInt::from_str(part).map_err(|_| bad())
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (parse_digits(n)?, parse_digits(d)?),
            None => (parse_digits(body)?, BigInt::one()),
        };
        let num = if negative { -num } else { num };
        Rational::new(num, den)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `v_p(x)`, with `Infinite` standing for the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// Multiplicity of `p` in a nonzero integer, and the cofactor.
pub(crate) fn split_prime_power(n: &BigInt, p: u64) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut rest = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            return (k, rest);
        }
        rest = q;
        k += 1;
    }
}

pub fn vp(x: &Rational, p: u64) -> Result<Valuation, ArithError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if x.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let (a, _) = split_prime_power(x.numer(), p);
    let (b, _) = split_prime_power(x.denom(), p);
    Ok(Valuation::Finite(a - b))
}

/// `s` with `s^2 <= n < (s+1)^2`.
pub fn floor_isqrt(n: &BigInt) -> Result<BigInt, ArithError> {
    if n.is_negative() {
        return Err(ArithError::NegativeSqrt(n.clone()));
    }
    Ok(n.sqrt())
}

/// Smallest `s` with `s^2 >= n`.
pub fn ceil_isqrt(n: &BigInt) -> Result<BigInt, ArithError> {
    let s = floor_isqrt(n)?;
    if &(&s * &s) == n {
        Ok(s)
    } else {
        Ok(s + 1)
    }
}

/// The square root of `n` when `n` is a perfect square.
pub fn is_perfect_square(n: &BigInt) -> Result<Option<BigInt>, ArithError> {
    let s = floor_isqrt(n)?;
    Ok(if &(&s * &s) == n { Some(s) } else { None })
}

/// A place of the rationals: a finite prime or the archimedean place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Primes dividing the numerator or denominator of a nonzero rational, ascending.
pub fn support(x: &Rational) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::new();
    for part in [x.numer(), x.denom()] {
        let mag = part.magnitude();
        if !mag.is_zero() {
            primes.extend(factorize(mag).into_iter().map(|(p, _)| p));
        }
    }
    primes.sort_unstable();
    primes.dedup();
    primes
}

/// Exponent `e` with `|x|_p = p^e`; `None` for `x = 0`.
pub fn abs_exponent(x: &Rational, p: u64) -> Result<Option<i64>, ArithError> {
    Ok(vp(x, p)?.finite().map(|v| -v))
}

pub fn abs_inf(x: &Rational) -> Rational {
    x.abs()
}

/// `p^e` as an exact rational.
pub fn prime_power(p: u64, e: i64) -> Rational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(base)
    } else {
        Rational(BigRational::new(BigInt::one(), base))
    }
}

/// `|x|_p = p^e` for every prime in the support of a nonzero `x`.
pub fn finite_abs_values(x: &Rational) -> Vec<(u64, i64)> {
    assert!(!x.is_zero(), "absolute values of zero carry no exponent");
    support(x)
        .into_iter()
        .map(|p| {
            let (a, _) = split_prime_power(x.numer(), p);
            let (b, _) = split_prime_power(x.denom(), p);
            (p, b - a)
        })
        .collect()
}

/// `|x|_inf * prod_p |x|_p`, computed exactly. Equals 1 for every nonzero `x`.
pub fn product_over_places(x: &Rational) -> Rational {
    finite_abs_values(x)
        .into_iter()
        .fold(abs_inf(x), |acc, (p, e)| acc * prime_power(p, e))
}
