//! Elementary symmetric functions `S_{a,b}(n,k)` of the reciprocals
//! `1/b, 1/(a+b), ..., 1/(a(n-1)+b)`.
//!
//! [`EsfState`] streams the recurrence
//! `S(n+1,k) = S(n,k) + S(n,k-1)/(b+an)` one term at a time. Internally it
//! keeps integer numerators `T_k = S(n,k) * P_n` over the shared denominator
//! `P_n = prod (b+ai)`, which turns every step into a multiply-add on big
//! integers with no gcd. Values leave the state reduced.
//!
//! [`esf_direct`] is the subset-enumeration oracle for small `n`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{vp_biguint, Valuation};
use crate::primes;
use crate::rational::ExactRational;

/// Largest `n` accepted by [`esf_direct`].
pub const DIRECT_ENUMERATION_LIMIT: u64 = 25;

const CHECKPOINT_TAG: &str = "esf-checkpoint/1";

/// Terms above this are not factored, which only disables the fast
/// integrality filter.
const FACTOR_LIMIT: u128 = 1 << 32;

/// First term `b` and common difference `a`, both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ProgressionParams {
    a: u64,
    b: u64,
}

#[derive(Deserialize)]
struct RawParams {
    a: u64,
    b: u64,
}

impl TryFrom<RawParams> for ProgressionParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.a, r.b)
    }
}

impl ProgressionParams {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument(format!("a and b must be positive, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// The `i`-th term `b + a i`, zero-based.
    pub fn term(&self, i: u64) -> u128 {
        self.b as u128 + self.a as u128 * i as u128
    }

    /// `prod_{i<n} (b + a i)`.
    pub fn term_product(&self, n: u64) -> BigUint {
        product_tree(&(0..n).map(|i| self.term(i)).collect::<Vec<_>>())
    }
}

fn product_tree(xs: &[u128]) -> BigUint {
    match xs.len() {
        0 => BigUint::one(),
        1 => BigUint::from(xs[0]),
        len => {
            let (l, r) = xs.split_at(len / 2);
            product_tree(l) * product_tree(r)
        }
    }
}

/// Prime factorization of the running denominator, when every term is small
/// enough to factor by trial division.
#[derive(Debug, Clone, Default)]
struct DenomProfile {
    factors: Option<BTreeMap<u64, u32>>,
}

impl DenomProfile {
    fn new() -> Self {
        Self { factors: Some(BTreeMap::new()) }
    }

    /// Adds the factorization of `x`; returns the primes of `x` that now
    /// divide the denominator exactly once, largest first.
    fn absorb(&mut self, x: u128) -> Vec<u64> {
        let Some(map) = self.factors.as_mut() else { return Vec::new() };
        if x >= FACTOR_LIMIT {
            self.factors = None;
            return Vec::new();
        }
        let mut x = x as u64;
        let mut seen = Vec::new();
        for p in primes::default_sieve().primes() {
            if p * p > x {
                break;
            }
            if x % p == 0 {
                seen.push(p);
            }
            while x % p == 0 {
                *map.entry(p).or_default() += 1;
                x /= p;
            }
        }
        if x > 1 {
            seen.push(x);
            *map.entry(x).or_default() += 1;
        }
        seen.retain(|p| map[p] == 1);
        seen.reverse();
        seen
    }

    /// Product of the full prime powers of the largest primes dividing the
    /// denominator, as large as fits in 63 bits. A value divisible by the
    /// denominator is divisible by this.
    fn filter_modulus(&self) -> Option<u64> {
        let map = self.factors.as_ref()?;
        let mut m: u64 = 1;
        for (&p, &e) in map.iter().rev().take(6) {
            let Some(pe) = p.checked_pow(e) else { break };
            match m.checked_mul(pe) {
                Some(v) if v < 1 << 63 => m = v,
                _ => break,
            }
        }
        (m > 1).then_some(m)
    }
}

/// Running values `S(n,1..=kmax)` for a fixed progression.
#[derive(Debug, Clone)]
pub struct EsfState {
    params: ProgressionParams,
    n: u64,
    denom: BigUint,
    numer: Vec<BigUint>,
    profile: DenomProfile,
    filter: Option<u64>,
    tracked: Vec<Tracked>,
}

/// Residues `T_k mod p` for a prime `p` dividing the denominator exactly
/// once. While that holds, `S(n,k)` can only be an integer if `p | T_k`, and
/// the residues update in `O(kmax)` word operations per step.
#[derive(Debug, Clone)]
struct Tracked {
    p: u64,
    res: Vec<u64>,
}

const TRACKED_PRIMES: usize = 4;

fn mod_u64(t: &BigUint, m: u64) -> u64 {
    (t % m).to_u64().expect("residue below modulus")
}

impl PartialEq for EsfState {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.n == other.n && self.numer == other.numer && self.denom == other.denom
    }
}

impl EsfState {
    /// The empty state (`n = 0`, all values zero).
    pub fn new(params: ProgressionParams, kmax: usize) -> Result<Self> {
        if kmax == 0 {
            return Err(Error::InvalidArgument("kmax must be at least 1".into()));
        }
        Ok(Self {
            params,
            n: 0,
            denom: BigUint::one(),
            numer: vec![BigUint::zero(); kmax],
            profile: DenomProfile::new(),
            filter: None,
            tracked: Vec::new(),
        })
    }

    pub fn params(&self) -> ProgressionParams {
        self.params
    }

    /// Terms consumed so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn kmax(&self) -> usize {
        self.numer.len()
    }

    /// Consumes the next term `1/(b + a n)`.
    pub fn advance(&mut self) {
        let x = self.params.term(self.n);
        // descending k so each step reads the previous row
        for k in (1..self.numer.len()).rev() {
            let (lo, hi) = self.numer.split_at_mut(k);
            hi[0] *= x;
            hi[0] += &lo[k - 1];
        }
        self.numer[0] *= x;
        self.numer[0] += &self.denom;
        self.denom *= x;
        self.n += 1;
        let fresh = self.profile.absorb(x);
        self.filter = self.profile.filter_modulus();
        self.update_tracked(x, fresh);
    }

    fn update_tracked(&mut self, x: u128, fresh: Vec<u64>) {
        // q | P before this step, so the carried-in P term vanishes mod q
        self.tracked.retain(|t| x % t.p as u128 != 0);
        for t in &mut self.tracked {
            let q = t.p as u128;
            let xm = x % q;
            for k in (1..t.res.len()).rev() {
                t.res[k] = ((xm * t.res[k] as u128 + t.res[k - 1] as u128) % q) as u64;
            }
            t.res[0] = (xm * t.res[0] as u128 % q) as u64;
        }
        for p in fresh.into_iter().take(TRACKED_PRIMES) {
            if self.tracked.len() == TRACKED_PRIMES {
                self.tracked.remove(0);
            }
            let res = self.numer.iter().map(|t| mod_u64(t, p)).collect();
            self.tracked.push(Tracked { p, res });
        }
    }

    /// Advances until `n` terms have been consumed.
    pub fn advance_to(&mut self, n: u64) {
        while self.n < n {
            self.advance();
        }
    }

    fn check_k(&self, k: usize) {
        assert!(k >= 1 && k <= self.numer.len(), "k = {k} outside 1..={}", self.numer.len());
    }

    /// `S(n,k)`, reduced. Zero for `k > n`.
    pub fn value(&self, k: usize) -> ExactRational {
        self.check_k(k);
        ExactRational::from_biguint_ratio(&self.numer[k - 1], &self.denom)
    }

    /// `[S(n,1), ..., S(n,kmax)]`.
    pub fn values(&self) -> Vec<ExactRational> {
        (1..=self.kmax()).map(|k| self.value(k)).collect()
    }

    /// Whether `S(n,k)` is an integer, without reducing it.
    ///
    /// A prime-power residue test rejects almost every non-integer in one
    /// pass over the numerator; survivors get the exact divisibility check.
    pub fn is_integer(&self, k: usize) -> bool {
        self.check_k(k);
        if self.tracked.iter().any(|t| t.res[k - 1] != 0) {
            return false;
        }
        let t = &self.numer[k - 1];
        if let Some(m) = self.filter {
            if !(t % m).is_zero() {
                return false;
            }
        }
        (t % &self.denom).is_zero()
    }

    /// `v_p(S(n,k))` from the unreduced numerator and denominator.
    pub fn valuation(&self, p: u64, k: usize) -> Valuation {
        self.check_k(k);
        let t = &self.numer[k - 1];
        match (vp_biguint(p, t), vp_biguint(p, &self.denom)) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a - b),
            _ => Valuation::Infinite,
        }
    }

    /// Compares `S(n,k)` with 1 exactly.
    pub fn cmp_one(&self, k: usize) -> std::cmp::Ordering {
        self.check_k(k);
        self.numer[k - 1].cmp(&self.denom)
    }

    /// Newline-delimited text: tag, `a`, `b`, `n`, `kmax`, then the `kmax`
    /// reduced values `S(n,1..=kmax)`.
    pub fn to_checkpoint(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CHECKPOINT_TAG}");
        let _ = writeln!(s, "{}", self.params.a);
        let _ = writeln!(s, "{}", self.params.b);
        let _ = writeln!(s, "{}", self.n);
        let _ = writeln!(s, "{}", self.kmax());
        for v in self.values() {
            let _ = writeln!(s, "{v}");
        }
        s
    }

    /// Inverse of [`EsfState::to_checkpoint`]. Rejects records whose values
    /// cannot be elementary symmetric values of the stated progression.
    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Checkpoint(m);
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(format!("missing {what}")));
        let tag = next("version tag")?;
        if tag != CHECKPOINT_TAG {
            return Err(bad(format!("unknown version tag {tag:?}")));
        }
        let num = |s: &str, what: &str| s.trim().parse::<u64>().map_err(|e| bad(format!("{what}: {e}")));
        let a = num(next("a")?, "a")?;
        let b = num(next("b")?, "b")?;
        let n = num(next("n")?, "n")?;
        let kmax = num(next("kmax")?, "kmax")? as usize;
        let params = ProgressionParams::new(a, b)?;
        let mut state = EsfState::new(params, kmax)?;
        let mut values = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let v: ExactRational = next(&format!("value {k}"))?.parse()?;
            values.push(v);
        }
        if lines.next().is_some_and(|l| !l.trim().is_empty()) {
            return Err(bad("trailing data".into()));
        }

        state.n = n;
        state.denom = params.term_product(n);
        for i in 0..n {
            state.profile.absorb(params.term(i));
        }
        state.filter = state.profile.filter_modulus();
        for (k, v) in values.iter().enumerate() {
            if v.numer().sign() == num_bigint::Sign::Minus {
                return Err(bad(format!("negative value at k = {}", k + 1)));
            }
            if (k as u64) >= n && !v.is_zero() {
                return Err(bad(format!("nonzero value at k = {} > n", k + 1)));
            }
            let den = v.denom().magnitude();
            let (q, r) = state.denom.div_rem(den);
            if !r.is_zero() {
                return Err(bad(format!("denominator at k = {} does not divide the term product", k + 1)));
            }
            state.numer[k] = v.numer().magnitude() * q;
        }
        Ok(state)
    }
}

fn check_nk(n: u64, k: u64) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    Ok(())
}

/// `S_{a,b}(n,k)` by the streaming recurrence.
pub fn esf(params: ProgressionParams, n: u64, k: u64) -> Result<ExactRational> {
    check_nk(n, k)?;
    let kmax = usize::try_from(k).map_err(|_| Error::Range(format!("k = {k}")))?;
    let mut st = EsfState::new(params, kmax)?;
    st.advance_to(n);
    Ok(st.value(kmax))
}

/// `S_{a,b}(n,k)` straight from the definition: the sum over all
/// `k`-subsets of `{0..n}` of the product of the chosen reciprocals.
/// Refuses `n > 25`.
pub fn esf_direct(params: ProgressionParams, n: u64, k: u64) -> Result<ExactRational> {
    check_nk(n, k)?;
    if n > DIRECT_ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard { n, limit: DIRECT_ENUMERATION_LIMIT });
    }
    let terms: Vec<u128> = (0..n).map(|i| params.term(i)).collect();
    let full = product_tree(&terms);

    // sum of full / prod(subset) over k-subsets, then divide by full
    fn walk(terms: &[u128], start: usize, left: usize, prod: &BigUint, full: &BigUint, acc: &mut BigUint) {
        if left == 0 {
            *acc += full / prod;
            return;
        }
        for i in start..=terms.len() - left {
            walk(terms, i + 1, left - 1, &(prod * terms[i]), full, acc);
        }
    }
    let mut acc = BigUint::zero();
    walk(&terms, 0, k as usize, &BigUint::one(), &full, &mut acc);
    Ok(ExactRational::from_biguint_ratio(&acc, &full))
}

/// `S_{a,b}(n,1) = sum 1/(b+ai)` over the running lcm of the terms.
pub fn reciprocal_sum(params: ProgressionParams, n: u64) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::KOutOfRange { k: 1, n });
    }
    let mut lcm = BigUint::one();
    for i in 0..n {
        let x = params.term(i);
        let r = (&lcm % x).to_u128().expect("residue below modulus");
        let g = if r == 0 { x } else { x.gcd(&r) };
        lcm *= x / g;
    }
    let mut num = BigUint::zero();
    for i in 0..n {
        num += &lcm / params.term(i);
    }
    Ok(ExactRational::from_biguint_ratio(&num, &lcm))
}
