//! Outward-rounded interval arithmetic on exact rationals.
//!
//! Every interval is a pair of rationals `[lo, hi]` guaranteed to contain the
//! real value it represents. Results are rounded outward onto the grid
//! `2^-bits` so sizes stay bounded; `exp` and `ln` use Taylor / `atanh`
//! series with explicit tail bounds. Nothing here touches hardware floats,
//! so answers are identical on every platform.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Fractional bits kept after each rounding step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(128);
    pub const MAX: Precision = Precision(4096);

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn new(bits: u32) -> Self {
        Precision(bits.clamp(16, Self::MAX.0))
    }

    /// Doubles the precision, or `None` once [`Precision::MAX`] is reached.
    pub fn widen(self) -> Option<Self> {
        (self.0 < Self::MAX.0).then(|| Precision((self.0 * 2).min(Self::MAX.0)))
    }
}

/// Largest `|q|` accepted by `exp`.
const EXP_ARG_LIMIT: i64 = 4096;

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Unreduced `num/den` with `den > 0`. Interval arithmetic only ever rounds
/// these onto a dyadic grid, so no gcd is taken along the way.
#[derive(Debug, Clone)]
struct Frac {
    num: BigInt,
    den: BigInt,
}

impl Frac {
    fn of(x: &BigRational) -> Self {
        Self { num: x.numer().clone(), den: x.denom().clone() }
    }

    fn add(&self, o: &Frac) -> Frac {
        if self.den == o.den {
            return Frac { num: &self.num + &o.num, den: self.den.clone() };
        }
        Frac { num: &self.num * &o.den + &o.num * &self.den, den: &self.den * &o.den }
    }

    fn mul(&self, o: &Frac) -> Frac {
        Frac { num: &self.num * &o.num, den: &self.den * &o.den }
    }

    /// Requires a nonzero value.
    fn recip(&self) -> Frac {
        if self.num.is_negative() {
            Frac { num: -&self.den, den: -&self.num }
        } else {
            Frac { num: self.den.clone(), den: self.num.clone() }
        }
    }

    fn cmp(&self, o: &Frac) -> Ordering {
        (&self.num * &o.den).cmp(&(&o.num * &self.den))
    }

    /// `floor(x 2^w)`
    fn floor_scaled(&self, w: u32) -> BigInt {
        (&self.num << w as usize).div_floor(&self.den)
    }

    /// `ceil(x 2^w)`
    fn ceil_scaled(&self, w: u32) -> BigInt {
        (&self.num << w as usize).div_ceil(&self.den)
    }
}

/// `x / 2^w` in canonical form.
fn dyadic(x: BigInt, w: u32) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let tz = (x.trailing_zeros().unwrap_or(0) as u32).min(w);
    BigRational::new_raw(x >> tz as usize, pow2(w - tz))
}

fn round_down(x: &Frac, p: Precision) -> BigRational {
    dyadic(x.floor_scaled(p.0), p.0)
}

fn round_up(x: &Frac, p: Precision) -> BigRational {
    dyadic(x.ceil_scaled(p.0), p.0)
}

/// `ceil(x / 2^w)`
fn shr_ceil(x: &BigInt, w: u32) -> BigInt {
    -((-x) >> w as usize)
}

/// `floor(x / 2^w)`
fn shr_floor(x: &BigInt, w: u32) -> BigInt {
    x >> w as usize
}

/// Series stop once a term falls below this many grid units; well above
/// the grid, where upward rounding would stall.
const SERIES_STOP: u32 = 16;

type Pair = (BigRational, BigRational);
type Cache<T> = Mutex<BTreeMap<u32, T>>;

/// Constants are cached up to this precision.
const CACHED_BITS: u32 = 8192;

static E_CACHE: Cache<Pair> = Mutex::new(BTreeMap::new());
static LN2_CACHE: Cache<(BigInt, BigInt)> = Mutex::new(BTreeMap::new());

fn cached<T: Clone>(cache: &Cache<T>, bits: u32, f: impl FnOnce() -> T) -> T {
    if bits > CACHED_BITS {
        return f();
    }
    if let Some(v) = cache.lock().expect("cache lock").get(&bits) {
        return v.clone();
    }
    let v = f();
    cache.lock().expect("cache lock").insert(bits, v.clone());
    v
}

/// Enclosure of `exp(q)` for a rational point.
fn exp_point(q: &BigRational, p: Precision) -> Result<Pair> {
    if q.abs() > BigRational::from_integer(BigInt::from(EXP_ARG_LIMIT)) {
        return Err(Error::Range(format!("exp argument {q} too large")));
    }
    if q.is_zero() {
        return Ok((BigRational::one(), BigRational::one()));
    }
    if q.is_negative() {
        let (l, h) = exp_point(&-q, p)?;
        return Ok((round_down(&Frac::of(&h).recip(), p), round_up(&Frac::of(&l).recip(), p)));
    }
    if q.is_one() {
        return Ok(cached(&E_CACHE, p.0, || exp_positive(q, p)));
    }
    Ok(exp_positive(q, p))
}

/// Taylor series of `exp(q / 2^s)` then `s` squarings, in fixed point with
/// `w` fractional bits; lower bounds round every step down, upper bounds up.
fn exp_positive(q: &BigRational, p: Precision) -> Pair {
    let qc = q.ceil().to_integer();
    // y = q / 2^s <= 1/2
    let s = qc.bits() as u32 + 1;
    // squaring s times multiplies the relative error by 2^s and the result
    // carries about 1.45 q integer bits
    let qi = u32::try_from(&qc).expect("bounded by EXP_ARG_LIMIT");
    let w = p.0 + s + 24 + qi + qi / 2;

    let y = Frac { num: q.numer().clone(), den: q.denom() << s as usize };
    let y_lo = y.floor_scaled(w);
    let y_hi = y.ceil_scaled(w);
    let one = pow2(w);
    let (mut t_lo, mut t_hi) = (one.clone(), one.clone());
    let (mut s_lo, mut s_hi) = (one.clone(), one);
    let stop = BigInt::from(SERIES_STOP);
    let mut j = 1u32;
    loop {
        let jb = BigInt::from(j);
        t_lo = shr_floor(&(&t_lo * &y_lo), w) / &jb;
        t_hi = shr_ceil(&(&t_hi * &y_hi), w).div_ceil(&jb);
        if t_hi < stop {
            // tail from this term on is at most 2 * term (ratio <= 1/2)
            s_hi += &t_hi * 2;
            break;
        }
        s_lo += &t_lo;
        s_hi += &t_hi;
        j += 1;
    }
    for _ in 0..s {
        s_lo = shr_floor(&(&s_lo * &s_lo), w);
        s_hi = shr_ceil(&(&s_hi * &s_hi), w);
    }
    let d = w - p.0;
    (dyadic(shr_floor(&s_lo, d), p.0), dyadic(shr_ceil(&s_hi, d), p.0))
}

/// `atanh(zn/zd)` for `0 <= zn/zd <= 1/3`, scaled by `2^w`.
fn atanh_scaled(zn: &BigInt, zd: &BigInt, w: u32) -> (BigInt, BigInt) {
    let z = Frac { num: zn.clone(), den: zd.clone() };
    let z_lo = z.floor_scaled(w);
    let z_hi = z.ceil_scaled(w);
    let z2_lo = shr_floor(&(&z_lo * &z_lo), w);
    let z2_hi = shr_ceil(&(&z_hi * &z_hi), w);
    let (mut pow_lo, mut pow_hi) = (z_lo, z_hi);
    let (mut s_lo, mut s_hi) = (BigInt::zero(), BigInt::zero());
    let stop = BigInt::from(SERIES_STOP);
    let mut j = 0u32;
    loop {
        let d = BigInt::from(2 * j + 1);
        let t_lo = &pow_lo / &d;
        let t_hi = pow_hi.div_ceil(&d);
        if t_hi < stop {
            // tail <= t / (1 - z^2) <= 9/8 t
            s_hi += (t_hi * 9u32).div_ceil(&BigInt::from(8));
            break;
        }
        s_lo += t_lo;
        s_hi += t_hi;
        pow_lo = shr_floor(&(&pow_lo * &z2_lo), w);
        pow_hi = shr_ceil(&(&pow_hi * &z2_hi), w);
        j += 1;
    }
    (s_lo, s_hi)
}

/// `ln 2 = 2 atanh(1/3)`, scaled by `2^w`.
fn ln2_scaled(w: u32) -> (BigInt, BigInt) {
    cached(&LN2_CACHE, w, || {
        let (l, h) = atanh_scaled(&BigInt::one(), &BigInt::from(3), w);
        (l * 2, h * 2)
    })
}

/// Enclosure of `ln(q)` for a rational point `q > 0`: `q = 2^m r` with
/// `1 <= r < 2`, and `ln r = 2 atanh((r-1)/(r+1))`.
fn ln_point(q: &BigRational, p: Precision) -> Result<Pair> {
    if !q.is_positive() {
        return Err(Error::Range(format!("ln of nonpositive {q}")));
    }
    let (num, den) = (q.numer(), q.denom());
    let mut m = num.bits() as i64 - den.bits() as i64;
    let shifted = |m: i64| -> (BigInt, BigInt) {
        if m >= 0 {
            (num.clone(), den << m as usize)
        } else {
            (num << (-m) as usize, den.clone())
        }
    };
    let (mut rn, mut rd) = shifted(m);
    if rn < rd {
        m -= 1;
        (rn, rd) = shifted(m);
    }
    debug_assert!(rd <= rn && rn < &rd * 2);

    let w = p.0 + 64 - m.unsigned_abs().leading_zeros() + 16;
    let (a_lo, a_hi) = atanh_scaled(&(&rn - &rd), &(&rn + &rd), w);
    let (mut lo, mut hi) = (a_lo * 2, a_hi * 2);
    if m != 0 {
        let (l2_lo, l2_hi) = ln2_scaled(w);
        if m > 0 {
            lo += l2_lo * m;
            hi += l2_hi * m;
        } else {
            lo += l2_hi * m;
            hi += l2_lo * m;
        }
    }
    let d = w - p.0;
    Ok((dyadic(shr_floor(&lo, d), p.0), dyadic(shr_ceil(&hi, d), p.0)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: ExactRational,
    hi: ExactRational,
    prec: Precision,
}

impl Interval {
    fn from_parts(lo: BigRational, hi: BigRational, prec: Precision) -> Self {
        debug_assert!(lo <= hi);
        Self { lo: lo.into(), hi: hi.into(), prec }
    }

    fn rounded(lo: &Frac, hi: &Frac, prec: Precision) -> Self {
        Self::from_parts(round_down(lo, prec), round_up(hi, prec), prec)
    }

    /// Point interval holding `x` exactly.
    pub fn exact(x: ExactRational, prec: Precision) -> Self {
        Self { lo: x.clone(), hi: x, prec }
    }

    pub fn int(v: i64, prec: Precision) -> Self {
        Self::exact(ExactRational::from(v), prec)
    }

    pub fn one(prec: Precision) -> Self {
        Self::int(1, prec)
    }

    /// Euler's number.
    pub fn e(prec: Precision) -> Self {
        Self::one(prec).exp().expect("exp(1)")
    }

    pub fn lo(&self) -> &ExactRational {
        &self.lo
    }

    pub fn hi(&self) -> &ExactRational {
        &self.hi
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    fn l(&self) -> &BigRational {
        self.lo.as_big_rational()
    }

    fn h(&self) -> &BigRational {
        self.hi.as_big_rational()
    }

    fn fl(&self) -> Frac {
        Frac::of(self.l())
    }

    fn fh(&self) -> Frac {
        Frac::of(self.h())
    }

    fn p(&self, other: &Interval) -> Precision {
        self.prec.max(other.prec)
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Self::rounded(&self.fl().add(&other.fl()), &self.fh().add(&other.fh()), self.p(other))
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Interval {
        Self::from_parts(-self.h(), -self.l(), self.prec)
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let (a, b, c, d) = (self.fl(), self.fh(), other.fl(), other.fh());
        let mut prods = [a.mul(&c), a.mul(&d), b.mul(&c), b.mul(&d)];
        prods.sort_by(|x, y| x.cmp(y));
        Self::rounded(&prods[0], &prods[3], self.p(other))
    }

    pub fn mul_int(&self, v: i64) -> Interval {
        self.mul(&Interval::int(v, self.prec))
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.l().is_positive() || self.h().is_negative() {
            Ok(Self::rounded(&self.fh().recip(), &self.fl().recip(), self.prec))
        } else {
            Err(Error::Range("reciprocal of interval containing zero".into()))
        }
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.l().is_negative() {
            return Err(Error::Range("sqrt of negative interval".into()));
        }
        let p = self.prec;
        let to_u = |x: BigInt| x.to_biguint().expect("nonnegative");
        let lo_r = to_u(self.fl().floor_scaled(2 * p.0)).sqrt();
        let hi_u = to_u(self.fh().ceil_scaled(2 * p.0));
        let mut hi_r = hi_u.sqrt();
        if &hi_r * &hi_r != hi_u {
            hi_r += 1u32;
        }
        Ok(Self::from_parts(
            dyadic(BigInt::from_biguint(Sign::Plus, lo_r), p.0),
            dyadic(BigInt::from_biguint(Sign::Plus, hi_r), p.0),
            p,
        ))
    }

    pub fn exp(&self) -> Result<Interval> {
        let (lo, _) = exp_point(self.l(), self.prec)?;
        let (_, hi) = exp_point(self.h(), self.prec)?;
        Ok(Self::from_parts(lo, hi, self.prec))
    }

    pub fn ln(&self) -> Result<Interval> {
        let (lo, _) = ln_point(self.l(), self.prec)?;
        let (_, hi) = ln_point(self.h(), self.prec)?;
        Ok(Self::from_parts(lo, hi, self.prec))
    }

    /// `Some(Less)` if the whole interval is below `x`, `Some(Greater)` if
    /// above, `Some(Equal)` for the point `x`, `None` if `x` is inside.
    pub fn cmp_rational(&self, x: &ExactRational) -> Option<Ordering> {
        if self.hi < *x {
            Some(Ordering::Less)
        } else if self.lo > *x {
            Some(Ordering::Greater)
        } else if self.lo == self.hi {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Same as [`Interval::cmp_rational`] against another enclosure.
    pub fn cmp_interval(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && other.lo == other.hi && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// The common floor of every point, when the enclosure pins it down.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor();
        (a == self.hi.floor()).then_some(a)
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) * ExactRational::new(1, 2).unwrap()).to_f64()
    }

    pub fn width(&self) -> ExactRational {
        &self.hi - &self.lo
    }
}
