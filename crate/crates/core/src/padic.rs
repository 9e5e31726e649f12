//! Finite-precision p-adic numbers for odd primes.
//!
//! A nonzero value is stored as `p^val * (unit + O(p^N))` with `unit` a
//! residue modulo `p^N` prime to `p`. Zero is either exact (the image of the
//! rational 0) or known only up to `O(p^k)` after cancellation.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{split_prime_power, ArithError, Rational, Valuation};
use crate::primes::is_prime;

/// Default relative precision in p-adic digits.
pub const DEFAULT_PRECISION: u32 = 32;

/// Exponent of a p-adic absolute value, possibly fractional.
pub type Exponent = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("p-adic arithmetic needs an odd prime, got {0}")]
    UnsupportedPrime(u64),
    #[error("precision must be at least one digit")]
    ZeroPrecision,
    #[error("mixed primes {0} and {1}")]
    MixedPrimes(u64, u64),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Why [`PadicNumber::sqrt`] produced no root in `Q_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NoSqrt {
    #[error("no square root in Q_p: odd valuation")]
    OddValuation,
    #[error("no square root in Q_p: unit is a non-residue")]
    NonResidue,
    #[error("square root undetermined: value is zero only to finite precision")]
    Undetermined,
}

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    /// `abs_prec = None` is exact zero; `Some(k)` is `O(p^k)`.
    Zero {
        abs_prec: Option<i64>,
    },
    Unit {
        val: i64,
        unit: BigUint,
        prec: u32,
    },
}

#[derive(Clone, PartialEq, Eq)]
pub struct PadicNumber {
    p: u64,
    repr: Repr,
}

/// `|a - b|_p`, or the admission that `a` and `b` agree to every known digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadicDistance {
    /// `|a - b|_p = p^e`.
    Exponent(i64),
    /// `a - b = O(p^k)`; only `|a - b|_p <= p^-k` is known.
    Indistinguishable { abs_prec: Option<i64> },
}

fn modulus(p: u64, n: u32) -> BigUint {
    BigUint::from(p).pow(n)
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> BigUint {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m);
    debug_assert!(ext.gcd.is_one(), "inverse of a non-unit");
    ext.x
        .mod_floor(&m)
        .to_biguint()
        .expect("mod_floor is nonnegative")
}

fn check_prime(p: u64) -> Result<(), PadicError> {
    if p == 2 || !is_prime(p) {
        return Err(PadicError::UnsupportedPrime(p));
    }
    Ok(())
}

impl PadicNumber {
    pub fn zero(p: u64) -> Result<Self, PadicError> {
        check_prime(p)?;
        Ok(PadicNumber {
            p,
            repr: Repr::Zero { abs_prec: None },
        })
    }

    pub fn from_rational(x: &Rational, p: u64, precision: u32) -> Result<Self, PadicError> {
        check_prime(p)?;
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        if x.is_zero() {
            return Ok(PadicNumber {
                p,
                repr: Repr::Zero { abs_prec: None },
            });
        }
        let (a, num) = split_prime_power(x.numer(), p);
        let (b, den) = split_prime_power(x.denom(), p);
        let m = BigInt::from(modulus(p, precision));
        let num = num.mod_floor(&m).to_biguint().expect("nonnegative");
        let den = den.mod_floor(&m).to_biguint().expect("nonnegative");
        let m = m.to_biguint().expect("positive");
        let unit = (num * mod_inverse(&den, &m)) % &m;
        Ok(PadicNumber {
            p,
            repr: Repr::Unit {
                val: a - b,
                unit,
                prec: precision,
            },
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero { .. } => Valuation::Infinite,
            Repr::Unit { val, .. } => Valuation::Finite(*val),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { unit, .. } => Some(unit),
        }
    }

    /// Relative precision in digits; `None` for zero.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { prec, .. } => Some(*prec),
        }
    }

    /// The value is known modulo `p^k` for the returned `k`; `None` means exact.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { abs_prec } => *abs_prec,
            Repr::Unit { val, prec, .. } => Some(val + i64::from(*prec)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    fn same_prime(&self, other: &Self) -> Result<(), PadicError> {
        if self.p != other.p {
            return Err(PadicError::MixedPrimes(self.p, other.p));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        let repr = match &self.repr {
            Repr::Zero { abs_prec } => Repr::Zero {
                abs_prec: *abs_prec,
            },
            Repr::Unit { val, unit, prec } => {
                let m = modulus(self.p, *prec);
                Repr::Unit {
                    val: *val,
                    unit: (&m - unit) % &m,
                    prec: *prec,
                }
            }
        };
        PadicNumber { p: self.p, repr }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_prime(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Zero { abs_prec: None }, _) | (_, Repr::Zero { abs_prec: None }) => {
                Repr::Zero { abs_prec: None }
            }
            (Repr::Zero { abs_prec: Some(k1) }, Repr::Zero { abs_prec: Some(k2) }) => Repr::Zero {
                abs_prec: Some(k1 + k2),
            },
            (Repr::Zero { abs_prec: Some(k) }, Repr::Unit { val, .. })
            | (Repr::Unit { val, .. }, Repr::Zero { abs_prec: Some(k) }) => Repr::Zero {
                abs_prec: Some(k + val),
            },
            (
                Repr::Unit {
                    val: v1,
                    unit: u1,
                    prec: n1,
                },
                Repr::Unit {
                    val: v2,
                    unit: u2,
                    prec: n2,
                },
            ) => {
                let prec = (*n1).min(*n2);
                let m = modulus(self.p, prec);
                Repr::Unit {
                    val: v1 + v2,
                    unit: (u1 * u2) % m,
                    prec,
                }
            }
        };
        Ok(PadicNumber { p: self.p, repr })
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_prime(other)?;
        let p = self.p;
        // Result is known modulo p^abs_prec (None: exactly).
        let abs_prec = match (self.absolute_precision(), other.absolute_precision()) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let units: Vec<(i64, &BigUint)> = [&self.repr, &other.repr]
            .into_iter()
            .filter_map(|r| match r {
                Repr::Unit { val, unit, .. } => Some((*val, unit)),
                Repr::Zero { .. } => None,
            })
            .collect();
        let Some(v) = units.iter().map(|(val, _)| *val).min() else {
            return Ok(PadicNumber {
                p,
                repr: Repr::Zero { abs_prec },
            });
        };
        let abs_prec = abs_prec.expect("a unit operand has finite absolute precision");
        if abs_prec <= v {
            return Ok(PadicNumber {
                p,
                repr: Repr::Zero {
                    abs_prec: Some(abs_prec),
                },
            });
        }
        let digits = (abs_prec - v) as u32;
        let m = modulus(p, digits);
        let pb = BigUint::from(p);
        let mut sum = BigUint::zero();
        for (val, unit) in units {
            sum += unit * pb.pow((val - v) as u32);
        }
        sum %= &m;
        if sum.is_zero() {
            return Ok(PadicNumber {
                p,
                repr: Repr::Zero {
                    abs_prec: Some(abs_prec),
                },
            });
        }
        let mut shift = 0u32;
        while (&sum % &pb).is_zero() {
            sum /= &pb;
            shift += 1;
        }
        let prec = digits - shift;
        let unit = sum % modulus(p, prec);
        Ok(PadicNumber {
            p,
            repr: Repr::Unit {
                val: v + i64::from(shift),
                unit,
                prec,
            },
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    /// Both square roots `(r, -r)` in `Q_p`, Hensel-lifted to the precision of `self`.
    pub fn sqrt(&self) -> Result<(Self, Self), NoSqrt> {
        let (val, unit, prec) = match &self.repr {
            Repr::Zero { abs_prec: None } => return Ok((self.clone(), self.clone())),
            Repr::Zero { abs_prec: Some(_) } => return Err(NoSqrt::Undetermined),
            Repr::Unit { val, unit, prec } => (*val, unit, *prec),
        };
        if val.rem_euclid(2) != 0 {
            return Err(NoSqrt::OddValuation);
        }
        let p = self.p;
        let residue = (unit % p).iter_u64_digits().next().unwrap_or(0);
        let root0 = sqrt_mod_prime(residue, p).ok_or(NoSqrt::NonResidue)?;
        // Newton iteration r <- r - (r^2 - u) / (2r), doubling correct digits.
        let mut root = BigUint::from(root0);
        let mut known = 1u32;
        while known < prec {
            known = (2 * known).min(prec);
            let m = modulus(p, known);
            let u = unit % &m;
            let sq = (&root * &root) % &m;
            let diff = (sq + &m - u) % &m;
            let inv = mod_inverse(&((&root * 2u32) % &m), &m);
            root = (&root + &m - (diff * inv) % &m) % &m;
        }
        let r = PadicNumber {
            p,
            repr: Repr::Unit {
                val: val / 2,
                unit: root,
                prec,
            },
        };
        let neg = r.neg();
        Ok((r, neg))
    }

    pub fn dist_exp(&self, other: &Self) -> Result<PadicDistance, PadicError> {
        let diff = self.sub(other)?;
        Ok(match diff.repr {
            Repr::Zero { abs_prec } => PadicDistance::Indistinguishable { abs_prec },
            Repr::Unit { val, .. } => PadicDistance::Exponent(-val),
        })
    }
}

/// Tonelli-Shanks; `None` when `a` is a non-residue mod the odd prime `p`.
fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    let mulmod = |x: u64, y: u64| ((u128::from(x) * u128::from(y)) % u128::from(p)) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    if powmod(a, (p - 1) / 2) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while powmod(z, (p - 1) / 2) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q);
    let mut t = powmod(a, q);
    let mut r = powmod(a, q.div_ceil(2));
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulmod(t2, t2);
            i += 1;
        }
        let b = powmod(c, 1 << (m - i - 1));
        m = i;
        c = mulmod(b, b);
        t = mulmod(t, c);
        r = mulmod(r, b);
    }
    Some(r)
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs_prec: None } => write!(f, "0"),
            Repr::Zero { abs_prec: Some(k) } => write!(f, "O({}^{})", self.p, k),
            Repr::Unit { val, unit, prec } => {
                write!(f, "{p}^{val} * ({unit} mod {p}^{prec})", p = self.p)
            }
        }
    }
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Result of asking whether a point lies in a disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    /// The point agrees with the center to every known digit but the known
    /// digits do not reach the radius.
    Undetermined,
}

/// The closed disk `{x : |x - center|_p <= p^radius_exp}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicDisk {
    pub center: PadicNumber,
    pub radius_exp: Exponent,
}

impl PadicDisk {
    pub fn new(center: PadicNumber, radius_exp: Exponent) -> Self {
        PadicDisk { center, radius_exp }
    }

    pub fn contains(&self, x: &PadicNumber) -> Result<Membership, PadicError> {
        Ok(match x.dist_exp(&self.center)? {
            PadicDistance::Exponent(e) => {
                if Exponent::from_integer(e) <= self.radius_exp {
                    Membership::Inside
                } else {
                    Membership::Outside
                }
            }
            PadicDistance::Indistinguishable { abs_prec: None } => Membership::Inside,
            PadicDistance::Indistinguishable { abs_prec: Some(k) } => {
                if Exponent::from_integer(-k) <= self.radius_exp {
                    Membership::Inside
                } else {
                    Membership::Undetermined
                }
            }
        })
    }
}
