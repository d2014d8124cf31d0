//! p-adic valuations and valuation certificates.
//!
//! A [`ValuationCertificate`] records a prime `p` with `n/(k+1) < p <= n/k`
//! and `p > ak + 2a + 2b/p`. Such a prime divides exactly `k` or `k+1` terms
//! of the progression (the multiples `p a0, p(a0+a), ..., p(a0+a(k+t))`),
//! each to the first power. The `k`-subsets made only of those terms
//! contribute valuation exactly `-k`; every other subset contributes at
//! least `1-k`. So `v_p(S_{a,b}(n,k)) = -k` and `S` is not an integer.
//!
//! The certificate carries `r`, `a0` and `t` so a verifier does no search.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esf::{esf, EsfState, ProgressionParams};
use crate::primes::is_prime;
use crate::rational::ExactRational;

/// Largest `n` for which exhaustive verification is offered.
pub const EXHAUSTIVE_LIMIT: u64 = 5000;

pub const GENERATOR_VERSION: &str = concat!("esfcheck ", env!("CARGO_PKG_VERSION"));

/// `v_p(x)`; `Infinite` for `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
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

impl std::ops::Add for Valuation {
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
            Valuation::Infinite => f.write_str("+inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "+inf" {
            return Ok(Valuation::Infinite);
        }
        s.parse().map(Valuation::Finite).map_err(serde::de::Error::custom)
    }
}

/// `v_p(m)` for a nonnegative big integer.
pub fn vp_biguint(p: u64, m: &BigUint) -> Valuation {
    assert!(p >= 2, "valuation base must be at least 2");
    if m.is_zero() {
        return Valuation::Infinite;
    }
    if p == 2 {
        return Valuation::Finite(m.trailing_zeros().unwrap_or(0) as i64);
    }
    // strip the largest power of p that fits in a word, then single factors
    let mut chunk = p;
    let mut chunk_exp = 1i64;
    while let Some(c) = chunk.checked_mul(p) {
        chunk = c;
        chunk_exp += 1;
    }
    let mut v = 0i64;
    let mut m = m.clone();
    loop {
        let (q, r) = m.div_rem(&BigUint::from(chunk));
        if !r.is_zero() {
            break;
        }
        m = q;
        v += chunk_exp;
    }
    loop {
        let (q, r) = m.div_rem(&BigUint::from(p));
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    Valuation::Finite(v)
}

/// `v_p(m)`, sign-independent; `Infinite` for `m = 0`.
pub fn vp_int(p: u64, m: &BigInt) -> Valuation {
    vp_biguint(p, m.magnitude())
}

/// `v_p(numerator) - v_p(denominator)`; `Infinite` for zero.
pub fn vp_rat(p: u64, x: &ExactRational) -> Valuation {
    match vp_int(p, x.numer()) {
        Valuation::Infinite => Valuation::Infinite,
        Valuation::Finite(v) => Valuation::Finite(v - vp_int(p, x.denom()).finite().expect("nonzero denominator")),
    }
}

/// The certificate hypotheses, named for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisClause {
    /// `p > n/(k+1)`, i.e. `p(k+1) > n`.
    IntervalLeft,
    /// `p <= n/k`, i.e. `pk <= n`.
    IntervalRight,
    /// `p > ak + 2a + 2b/p`, i.e. `p^2 > p(ak+2a) + 2b`.
    SizeBound,
}

impl fmt::Display for HypothesisClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HypothesisClause::IntervalLeft => "p > n/(k+1)",
            HypothesisClause::IntervalRight => "p <= n/k",
            HypothesisClause::SizeBound => "p > ak + 2a + 2b/p",
        })
    }
}

/// Integers travel as decimal strings in JSON.
mod dec {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationCertificate {
    #[serde(with = "dec")]
    pub a: u64,
    #[serde(with = "dec")]
    pub b: u64,
    #[serde(with = "dec")]
    pub n: u64,
    #[serde(with = "dec")]
    pub k: u64,
    #[serde(with = "dec")]
    pub p: u64,
    /// Unique `r` in `[0, p)` with `p | ar + b`.
    #[serde(with = "dec")]
    pub r: u64,
    /// `(ar + b)/p`.
    #[serde(with = "dec")]
    pub a0: u64,
    /// `-1` when only `k` terms are multiples of `p`, else `0`.
    #[serde(with = "dec")]
    pub t: i8,
    #[serde(with = "dec")]
    pub claimed_valuation: i64,
    pub generator_version: String,
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn hypotheses(a: u64, b: u64, n: u64, k: u64, p: u64) -> std::result::Result<(), HypothesisClause> {
    if big(p) * big(k + 1) <= big(n) {
        return Err(HypothesisClause::IntervalLeft);
    }
    if big(p) * big(k) > big(n) {
        return Err(HypothesisClause::IntervalRight);
    }
    let rhs = big(p) * (big(a) * big(k) + big(a) * 2u32) + big(b) * 2u32;
    if big(p) * big(p) <= rhs {
        return Err(HypothesisClause::SizeBound);
    }
    Ok(())
}

fn mod_inverse_prime(x: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut base = (x % p) as u128;
    let mut e = p - 2;
    let m = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

/// `t = -1` iff `p(ak + a0) > a(n-1) + b`.
fn expected_t(a: u64, b: u64, n: u64, k: u64, p: u64, a0: u64) -> i8 {
    let lhs = big(p) * (big(a) * big(k) + big(a0));
    let rhs = big(a) * big(n - 1) + big(b);
    if lhs > rhs {
        -1
    } else {
        0
    }
}

/// Builds the certificate for `(a, b, n, k)` with witness prime `p`.
pub fn make_certificate(params: ProgressionParams, n: u64, k: u64, p: u64) -> Result<ValuationCertificate> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let (a, b) = (params.a(), params.b());
    hypotheses(a, b, n, k, p).map_err(Error::Hypothesis)?;

    // p > a, so a is invertible mod p
    let r = ((p - b % p) % p) as u128 * mod_inverse_prime(a, p) as u128 % p as u128;
    let r = r as u64;
    let first = params.term(r);
    debug_assert_eq!(first % p as u128, 0);
    let a0 = u64::try_from(first / p as u128).map_err(|_| Error::Range("a0 exceeds u64".into()))?;
    Ok(ValuationCertificate {
        a,
        b,
        n,
        k,
        p,
        r,
        a0,
        t: expected_t(a, b, n, k, p, a0),
        claimed_valuation: -(k as i64),
        generator_version: GENERATOR_VERSION.to_string(),
    })
}

/// Searches `(n/(k+1), n/k]` upward for the first prime meeting the size
/// hypothesis and certifies with it.
pub fn find_certificate(params: ProgressionParams, n: u64, k: u64) -> Option<ValuationCertificate> {
    if k == 0 || k > n {
        return None;
    }
    crate::primes::default_sieve()
        .interval_primes(n, k)
        .find(|&p| hypotheses(params.a(), params.b(), n, k, p).is_ok())
        .and_then(|p| make_certificate(params, n, k, p).ok())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Fast,
    Exhaustive,
}

/// The sub-check a certificate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyClause {
    Parameters,
    NotPrime,
    IntervalLeft,
    IntervalRight,
    SizeBound,
    Coprime,
    Residue,
    A0Value,
    A0Bound,
    TSelector,
    ClaimedValuation,
    SquareBound,
    MultipleCount,
    MultipleForm,
    MultipleUnit,
    SumIdentity,
    ExactValuation,
}

impl fmt::Display for VerifyClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyClause::Parameters => "a, b >= 1 and 1 <= k <= n",
            VerifyClause::NotPrime => "p is prime",
            VerifyClause::IntervalLeft => "p > n/(k+1)",
            VerifyClause::IntervalRight => "p <= n/k",
            VerifyClause::SizeBound => "p > ak + 2a + 2b/p",
            VerifyClause::Coprime => "gcd(a, p) = 1",
            VerifyClause::Residue => "0 <= r < p and p | ar + b",
            VerifyClause::A0Value => "a0 = (ar + b)/p",
            VerifyClause::A0Bound => "a0 < a + b/p",
            VerifyClause::TSelector => "t = -1 iff p(ak + a0) > a(n-1) + b",
            VerifyClause::ClaimedValuation => "claimed valuation = -k",
            VerifyClause::SquareBound => "p^2 > a(n-1) + b",
            VerifyClause::MultipleCount => "exactly k + t + 1 terms are multiples of p",
            VerifyClause::MultipleForm => "multiples are p(a0 + aj)",
            VerifyClause::MultipleUnit => "p does not divide a0 + aj for j <= k",
            VerifyClause::SumIdentity => "sum_{j<=k} (a0 + aj) = (k+1)(ak + 2a0)/2 and is prime to p",
            VerifyClause::ExactValuation => "v_p(S) = -k by exact computation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub mode: VerifyMode,
    pub failed: Option<VerifyClause>,
    /// The recomputed `v_p(S)` in exhaustive mode.
    pub exact_valuation: Option<Valuation>,
}

fn fast_checks(c: &ValuationCertificate) -> std::result::Result<(), VerifyClause> {
    use VerifyClause::*;
    let (a, b, n, k, p) = (c.a, c.b, c.n, c.k, c.p);
    if a == 0 || b == 0 || k == 0 || k > n {
        return Err(Parameters);
    }
    if !is_prime(p) {
        return Err(NotPrime);
    }
    match hypotheses(a, b, n, k, p) {
        Err(HypothesisClause::IntervalLeft) => return Err(IntervalLeft),
        Err(HypothesisClause::IntervalRight) => return Err(IntervalRight),
        Err(HypothesisClause::SizeBound) => return Err(SizeBound),
        Ok(()) => {}
    }
    if a.gcd(&p) != 1 {
        return Err(Coprime);
    }
    let first = big(a) * big(c.r) + big(b);
    if c.r >= p || !(&first % big(p)).is_zero() {
        return Err(Residue);
    }
    if big(c.a0) * big(p) != first {
        return Err(A0Value);
    }
    if big(c.a0) * big(p) >= big(a) * big(p) + big(b) {
        return Err(A0Bound);
    }
    if c.t != expected_t(a, b, n, k, p, c.a0) {
        return Err(TSelector);
    }
    if c.claimed_valuation != -(k as i64) {
        return Err(ClaimedValuation);
    }
    // every term has v_p <= 1
    if big(p) * big(p) <= big(a) * big(n - 1) + big(b) {
        return Err(SquareBound);
    }

    // multiples of p among b + ai, i < n, sit at i = r + pj
    let count = if c.r < n { (n - 1 - c.r) / p + 1 } else { 0 };
    let expect = (k as i128 + c.t as i128 + 1) as u64;
    if count != expect || (count != k && count != k + 1) {
        return Err(MultipleCount);
    }
    let params = ProgressionParams::new(a, b).map_err(|_| Parameters)?;
    for j in 0..count {
        let term = params.term(c.r + p * j);
        if term != p as u128 * (c.a0 as u128 + a as u128 * j as u128) {
            return Err(MultipleForm);
        }
    }
    for j in 0..=k {
        if (c.a0 as u128 + a as u128 * j as u128) % p as u128 == 0 {
            return Err(MultipleUnit);
        }
    }
    if c.t == 0 {
        let direct: BigUint = (0..=k).map(|j| big(c.a0) + big(a) * big(j)).sum();
        let closed = big(k + 1) * (big(a) * big(k) + big(c.a0) * 2u32);
        if direct.clone() * 2u32 != closed || (&direct % big(p)).is_zero() {
            return Err(SumIdentity);
        }
    }
    Ok(())
}

/// Re-checks a certificate. Fast mode replays every invariant and the
/// multiples-of-`p` analysis in `O(k)`; exhaustive mode also computes
/// `S_{a,b}(n,k)` exactly (only for `n <= 5000`).
pub fn verify_certificate(cert: &ValuationCertificate, mode: VerifyMode) -> Result<VerifyReport> {
    if mode == VerifyMode::Exhaustive && cert.n > EXHAUSTIVE_LIMIT {
        return Err(Error::ExhaustiveLimit { n: cert.n, limit: EXHAUSTIVE_LIMIT });
    }
    if let Err(clause) = fast_checks(cert) {
        return Ok(VerifyReport { passed: false, mode, failed: Some(clause), exact_valuation: None });
    }
    if mode == VerifyMode::Fast {
        return Ok(VerifyReport { passed: true, mode, failed: None, exact_valuation: None });
    }
    let params = ProgressionParams::new(cert.a, cert.b)?;
    let kmax = usize::try_from(cert.k).map_err(|_| Error::Range("k".into()))?;
    let mut st = EsfState::new(params, kmax)?;
    st.advance_to(cert.n);
    let v = vp_rat(cert.p, &st.value(kmax));
    let ok = v == Valuation::Finite(-(cert.k as i64));
    Ok(VerifyReport {
        passed: ok,
        mode,
        failed: (!ok).then_some(VerifyClause::ExactValuation),
        exact_valuation: Some(v),
    })
}

/// The sub-sum of `S` over `k`-subsets made only of multiples of `p`:
/// `p^-k` times `S_{a,a0}(k+t+1, k)`.
pub fn multiples_partial_sum(cert: &ValuationCertificate) -> Result<ExactRational> {
    let params = ProgressionParams::new(cert.a, cert.a0)?;
    let count = (cert.k as i64 + cert.t as i64 + 1) as u64;
    let inner = esf(params, count, cert.k)?;
    let pk = ExactRational::from_integer(BigInt::from(cert.p)).pow(u32::try_from(cert.k).map_err(|_| Error::Range("k".into()))?);
    Ok(&inner / &pk)
}

impl ValuationCertificate {
    pub fn params(&self) -> Result<ProgressionParams> {
        ProgressionParams::new(self.a, self.b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}
