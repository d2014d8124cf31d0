//! Exact rationals over arbitrary-precision integers.
//!
//! [`ExactRational`] is always kept in canonical form: positive denominator,
//! numerator and denominator coprime, zero stored as `0/1`. The text form is
//! `p/q` in base 10 with `/q` omitted when `q = 1`; it is the only encoding
//! used by checkpoints and JSON reports.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    /// Builds `numer/denom`, reducing. Fails on a zero denominator.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Self(BigRational::new(numer.into(), denom)))
    }

    /// `1/m` for a positive machine integer.
    pub fn recip_of(m: u128) -> Self {
        assert!(m > 0, "reciprocal of zero");
        Self(BigRational::new_raw(BigInt::one(), BigInt::from(m)))
    }

    /// Reduces `numer/denom` for nonnegative big integers with `denom > 0`.
    pub(crate) fn from_biguint_ratio(numer: &BigUint, denom: &BigUint) -> Self {
        debug_assert!(!denom.is_zero());
        if numer.is_zero() {
            return Self::zero();
        }
        let g = numer.gcd(denom);
        let (n, d) = if g.is_one() {
            (numer.clone(), denom.clone())
        } else {
            (numer / &g, denom / &g)
        };
        Self(BigRational::new_raw(
            BigInt::from_biguint(Sign::Plus, n),
            BigInt::from_biguint(Sign::Plus, d),
        ))
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

    pub fn is_integer(&self) -> bool {
        self.0.denom().is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("reciprocal of zero".into()));
        }
        Ok(Self(self.0.recip()))
    }

    pub fn pow(&self, e: u32) -> Self {
        Self(Pow::pow(&self.0, e))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Nearest double, for display only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big_rational(self) -> BigRational {
        self.0
    }

    /// Decimal rendering rounded to `sig` significant digits (half away from
    /// zero). Plain notation for exponents in `-6..21`, scientific otherwise.
    pub fn to_decimal(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return if sig == 1 { "0".into() } else { format!("0.{}", "0".repeat(sig - 1)) };
        }
        let neg = self.0.is_negative();
        let num = self.0.numer().abs();
        let den = self.0.denom().clone();
        let ten = BigInt::from(10u32);

        // exponent e with 10^e <= num/den < 10^(e+1)
        let mut e = num.to_string().len() as i64 - den.to_string().len() as i64;
        let below = |e: i64| -> bool {
            if e >= 0 {
                num < &den * Pow::pow(&ten, e as u64)
            } else {
                &num * Pow::pow(&ten, (-e) as u64) < den
            }
        };
        if below(e) {
            e -= 1;
        }
        let shift = sig as i64 - 1 - e;
        let (n2, d2) = if shift >= 0 {
            (&num * Pow::pow(&ten, shift as u64), den.clone())
        } else {
            (num.clone(), &den * Pow::pow(&ten, (-shift) as u64))
        };
        let (q, r) = n2.div_rem(&d2);
        let mut scaled = if &r * 2 >= d2 { q + 1 } else { q };
        if scaled == Pow::pow(&ten, sig as u64) {
            scaled /= &ten;
            e += 1;
        }
        let digits = scaled.to_string();
        let body = if (-6..21).contains(&e) {
            if e >= 0 {
                let int_len = e as usize + 1;
                if int_len >= digits.len() {
                    format!("{}{}", digits, "0".repeat(int_len - digits.len()))
                } else {
                    format!("{}.{}", &digits[..int_len], &digits[int_len..])
                }
            } else {
                format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
            }
        } else if digits.len() > 1 {
            format!("{}.{}e{}", &digits[..1], &digits[1..], e)
        } else {
            format!("{}e{}", digits, e)
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl Default for ExactRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<u64> for ExactRational {
    fn from(n: u64) -> Self {
        Self::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&rhs.0))
            }
        }
        impl $tr for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$m(rhs.0))
            }
        }
        impl $tr<&ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &ExactRational) -> ExactRational {
                ExactRational(self.0.$m(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&ExactRational> for &ExactRational {
    type Output = ExactRational;
    /// Panics on division by zero, like the integer types.
    fn div(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 / &rhs.0)
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

/// Exact sum.
pub fn add(x: &ExactRational, y: &ExactRational) -> ExactRational {
    x + y
}

/// Exact product.
pub fn mul(x: &ExactRational, y: &ExactRational) -> ExactRational {
    x * y
}

pub fn is_integer(x: &ExactRational) -> bool {
    x.is_integer()
}

impl PartialEq<i64> for ExactRational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<i64> for ExactRational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    /// Accepts `p` or `p/q` with decimal integers; `q` must be nonzero.
    /// Non-canonical input such as `2/4` is reduced.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            if t.is_empty() || !t.trim_start_matches(['-', '+']).bytes().all(|c| c.is_ascii_digit()) {
                return Err(Error::Parse(format!("bad integer {t:?}")));
            }
            t.parse::<BigInt>().map_err(|e| Error::Parse(format!("{t:?}: {e}")))
        };
        match s.split_once('/') {
            None => Ok(Self::from_integer(parse_int(s)?)),
            Some((p, q)) => {
                let q = parse_int(q)?;
                if q.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                Ok(Self(BigRational::new(parse_int(p)?, q)))
            }
        }
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
