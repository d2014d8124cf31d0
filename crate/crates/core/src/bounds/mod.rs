//! Threshold predicates evaluated with outward rounding.
//!
//! `B1 = (b/a)(exp(a(sqrt(2b^2+1)-1)/b) - 1)` and
//! `B2 = (e/a) ln((an+b)/b) + e/b`. When `2 <= k <= n` and either
//! `n <= B1` or `k >= B2`, the sum lies strictly between 0 and 1.
//!
//! A predicate reported `true` holds for the real numbers involved; `false`
//! may also mean the enclosure could not separate the two sides.

pub mod interval;

use std::cmp::Ordering;

use serde::Serialize;

pub use interval::{Interval, Precision};

use crate::error::{Error, Result};
use crate::esf::ProgressionParams;
use crate::primes::PrimeScheduleTable;
use crate::rational::ExactRational;

/// Cutoff above which the prime-gap argument takes over for small `(a, b)`.
pub const LARGE_N_CUTOFF: u64 = 120_000;

/// Published `n_a` for `a = 2..=12`.
pub const PUBLISHED_NA: [u64; 11] = [4437, 2086, 1397, 1143, 550, 640, 588, 515, 571, 627, 516];

/// Precision ceiling for predicate evaluation; beyond it a side is left
/// undecided.
const PREDICATE_MAX_BITS: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    OutwardCertified,
    Inconclusive,
}

/// An enclosure `[lower, upper]` of a real quantity, rendered to 20
/// significant digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enclosure {
    pub lower: String,
    pub upper: String,
}

impl Enclosure {
    fn of(iv: &Interval) -> Self {
        Self { lower: iv.lo().to_decimal(20), upper: iv.hi().to_decimal(20) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// `B1`; `None` when it does not fit the exponential's domain (it then
    /// exceeds every 64-bit `n` by far).
    pub small_n_bound: Option<Enclosure>,
    pub large_k_bound: Enclosure,
    /// `n <= B1`, certified.
    pub small_regime: bool,
    /// `k >= B2`, certified.
    pub large_k_regime: bool,
    pub rounding_mode: RoundingMode,
    pub precision_bits: u32,
}

impl ThresholdReport {
    /// Either regime certifies `0 < S < 1`.
    pub fn certifies(&self) -> bool {
        self.small_regime || self.large_k_regime
    }
}

fn rat(v: u64) -> ExactRational {
    ExactRational::from(v)
}

/// `a (sqrt(2b^2+1) - 1) / b`
fn small_n_exponent(a: u64, b: u64, prec: Precision) -> Result<Interval> {
    let b2 = ExactRational::from(2u64) * rat(b) * rat(b) + ExactRational::one();
    let root = Interval::exact(b2, prec).sqrt()?;
    let ab = ExactRational::new(a, b)?;
    Ok(root.sub(&Interval::one(prec)).mul(&Interval::exact(ab, prec)))
}

/// `ln(an/b + 1)`; `n <= B1` iff this is at most [`small_n_exponent`].
fn log_scaled_n(a: u64, b: u64, n: u64, prec: Precision) -> Result<Interval> {
    let x = ExactRational::new(a as u128 as i128 * n as i128, b)? + ExactRational::one();
    Interval::exact(x, prec).ln()
}

fn b1(a: u64, b: u64, exponent: &Interval, prec: Precision) -> Result<Option<Interval>> {
    if *exponent.hi() > 4000i64 {
        return Ok(None);
    }
    let ba = Interval::exact(ExactRational::new(b, a)?, prec);
    Ok(Some(ba.mul(&exponent.exp()?.sub(&Interval::one(prec)))))
}

/// `(e/a) ln((an+b)/b) + e/b`
fn b2(a: u64, b: u64, n: u64, prec: Precision) -> Result<Interval> {
    let e = Interval::e(prec);
    let ratio = ExactRational::new(a as i128 * n as i128 + b as i128, b)?;
    let ln = Interval::exact(ratio, prec).ln()?;
    let ea = e.mul(&Interval::exact(ExactRational::new(1, a)?, prec));
    let eb = e.mul(&Interval::exact(ExactRational::new(1, b)?, prec));
    Ok(ea.mul(&ln).add(&eb))
}

/// Runs `f` at increasing precision until it returns a decided answer.
fn resolve<T>(mut f: impl FnMut(Precision) -> Result<Option<T>>, max_bits: u32) -> Result<(Option<T>, Precision)> {
    let mut prec = Precision::DEFAULT;
    loop {
        if let Some(v) = f(prec)? {
            return Ok((Some(v), prec));
        }
        match prec.widen() {
            Some(p) if p.bits() <= max_bits => prec = p,
            _ => return Ok((None, prec)),
        }
    }
}

fn decided(o: Option<Ordering>) -> Option<Ordering> {
    o.filter(|o| *o != Ordering::Equal)
}

/// Certified evaluation of both small-sum regimes for `2 <= k <= n`.
pub fn lemma22_applies(params: ProgressionParams, n: u64, k: u64) -> Result<ThresholdReport> {
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let (a, b) = (params.a(), params.b());

    // n <= B1, compared in log space so huge exponents are harmless
    let (small, p1) = resolve(
        |prec| {
            let lhs = log_scaled_n(a, b, n, prec)?;
            let rhs = small_n_exponent(a, b, prec)?;
            Ok(decided(lhs.cmp_interval(&rhs)).map(|o| o == Ordering::Less))
        },
        PREDICATE_MAX_BITS,
    )?;
    let kr = rat(k);
    let (large, p2) = resolve(
        |prec| Ok(decided(b2(a, b, n, prec)?.cmp_rational(&kr)).map(|o| o == Ordering::Less)),
        PREDICATE_MAX_BITS,
    )?;
    let prec = p1.max(p2);
    let exponent = small_n_exponent(a, b, prec)?;
    let mode = if small.is_some() && large.is_some() {
        RoundingMode::OutwardCertified
    } else {
        RoundingMode::Inconclusive
    };
    Ok(ThresholdReport {
        small_n_bound: b1(a, b, &exponent, prec)?.as_ref().map(Enclosure::of),
        large_k_bound: Enclosure::of(&b2(a, b, n, prec)?),
        small_regime: small.unwrap_or(false),
        large_k_regime: large.unwrap_or(false),
        rounding_mode: mode,
        precision_bits: prec.bits(),
    })
}

/// `3275 a (sqrt(2) e + 1)/(e^a - 1) + 1`
fn b_cap_interval(a: u64, prec: Precision) -> Result<Interval> {
    let e = Interval::e(prec);
    let sqrt2 = Interval::int(2, prec).sqrt()?;
    let num = sqrt2.mul(&e).add(&Interval::one(prec)).mul_int(3275 * a as i64);
    let den = Interval::int(a as i64, prec).exp()?.sub(&Interval::one(prec));
    Ok(num.div(&den)?.add(&Interval::one(prec)))
}

/// `floor(3275 a (sqrt(2) e + 1)/(e^a - 1) + 1)`: the largest `b` in the
/// small-`(a, b)` regime, for `1 <= a <= 18`.
pub fn b_cap(a: u64) -> Result<u64> {
    if !(1..=18).contains(&a) {
        return Err(Error::InvalidArgument(format!("b cap defined for 1 <= a <= 18, got {a}")));
    }
    let (v, _) = resolve(|prec| Ok(b_cap_interval(a, prec)?.floor()), Precision::MAX.bits())?;
    let v = v.ok_or_else(|| Error::Range(format!("b cap for a = {a} unresolved")))?;
    u64::try_from(&v).map_err(|_| Error::Range("b cap".into()))
}

/// `min(27, b_cap(a))`, the admissible `b` range of the small-`a` sweep.
pub fn b_max(a: u64) -> Result<u64> {
    Ok(b_cap(a)?.min(27))
}

/// Whether `(a, b)` lies in the regime with the fixed `n > 120000` cutoff.
pub fn small_ab_regime(a: u64, b: u64) -> Result<bool> {
    Ok(a <= 18 && b <= b_cap(a)?)
}

/// Certified check of the prime-gap lemma's hypotheses: `k < B2`, and `n`
/// beyond `120000` (small `(a, b)`) or beyond `B1` (otherwise). A `true`
/// answer guarantees a prime `p` in `(n/(k+1), n/k]` with `p > ak + 2a + 6`.
pub fn lemma24_hypotheses(params: ProgressionParams, n: u64, k: u64) -> bool {
    lemma24_inner(params, n, k).unwrap_or(false)
}

fn lemma24_inner(params: ProgressionParams, n: u64, k: u64) -> Result<bool> {
    let (a, b) = (params.a(), params.b());
    if k == 0 {
        return Ok(false);
    }
    let kr = rat(k);
    let (below, _) = resolve(
        |prec| Ok(decided(b2(a, b, n, prec)?.cmp_rational(&kr)).map(|o| o == Ordering::Greater)),
        PREDICATE_MAX_BITS,
    )?;
    if below != Some(true) {
        return Ok(false);
    }
    if small_ab_regime(a, b)? {
        return Ok(n > LARGE_N_CUTOFF);
    }
    let (beyond, _) = resolve(
        |prec| {
            let lhs = log_scaled_n(a, b, n, prec)?;
            let rhs = small_n_exponent(a, b, prec)?;
            Ok(decided(lhs.cmp_interval(&rhs)).map(|o| o == Ordering::Greater))
        },
        PREDICATE_MAX_BITS,
    )?;
    Ok(beyond == Some(true))
}

/// `floor((e/a) ln(120000 a + 1) + e)`, the largest `k` left open by the
/// log bound when `n <= 120000` and `b >= 1`.
pub fn compute_ka(a: u64) -> Result<u64> {
    if !(2..=12).contains(&a) {
        return Err(Error::InvalidArgument(format!("k_a defined for 2 <= a <= 12, got {a}")));
    }
    let (v, _) = resolve(
        |prec| {
            let e = Interval::e(prec);
            let ln = Interval::int((LARGE_N_CUTOFF * a + 1) as i64, prec).ln()?;
            let x = e.mul(&ln).div(&Interval::int(a as i64, prec))?.add(&e);
            Ok(x.floor())
        },
        Precision::MAX.bits(),
    )?;
    let v = v.ok_or_else(|| Error::Range(format!("k_a for a = {a} unresolved")))?;
    u64::try_from(&v).map_err(|_| Error::Range("k_a".into()))
}

pub fn published_na(a: u64) -> Option<u64> {
    (2..=12).contains(&a).then(|| PUBLISHED_NA[(a - 2) as usize])
}

/// `max(k_a p_{i_{k_a}}, a(k_a+1)(k_a+2) + ceil(2 b (k_a+1) / p_{i_{k_a}}))`
/// at `b = b_max`.
pub fn compute_na(a: u64, b_max: u64, table: &PrimeScheduleTable) -> Result<u64> {
    let ka = compute_ka(a)?;
    let row = table
        .row(ka)
        .ok_or_else(|| Error::InvalidArgument(format!("k_a = {ka} not in schedule table")))?;
    let p = row.p_ik;
    let first = ka * p;
    let second = a * (ka + 1) * (ka + 2) + (2 * b_max * (ka + 1)).div_ceil(p);
    Ok(first.max(second))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NaReport {
    pub a: u64,
    pub k_a: u64,
    pub b_max: u64,
    pub p_ika: u64,
    pub published: u64,
    pub recomputed: u64,
    /// `max(published, recomputed)`; the sweep runs `n` up to this minus one.
    pub operational: u64,
    pub discrepancy: bool,
}

pub fn na_report(a: u64, table: &PrimeScheduleTable) -> Result<NaReport> {
    let published = published_na(a).ok_or_else(|| Error::InvalidArgument(format!("n_a defined for 2 <= a <= 12, got {a}")))?;
    let k_a = compute_ka(a)?;
    let b_max = b_max(a)?;
    let recomputed = compute_na(a, b_max, table)?;
    Ok(NaReport {
        a,
        k_a,
        b_max,
        p_ika: table.row(k_a).map(|r| r.p_ik).unwrap_or(0),
        published,
        recomputed,
        operational: published.max(recomputed),
        discrepancy: published != recomputed,
    })
}

pub fn na_table(table: &PrimeScheduleTable) -> Result<Vec<NaReport>> {
    (2..=12).map(|a| na_report(a, table)).collect()
}
