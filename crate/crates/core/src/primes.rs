//! Prime infrastructure: an Eratosthenes sieve, deterministic Miller-Rabin
//! for all of `u64`, prime search in the intervals `(n/(k+1), n/k]`, and the
//! prime schedule table `(k, i_k, p_{i_k})` used to bridge the finite range.
//!
//! Interval membership is always decided by integer cross-multiplication:
//! `p > n/(k+1)` iff `p(k+1) > n`, and `p <= n/k` iff `pk <= n`.

use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::bounds::interval::{Interval, Precision};
use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Sieve limit used when none is configured.
pub const DEFAULT_SIEVE_LIMIT: u64 = 120_000;

/// Largest `k` covered by the schedule table.
pub const SCHEDULE_K_MAX: u64 = 34;

/// Primes `<= limit` in ascending order.
pub fn sieve(limit: u64) -> Vec<u64> {
    sieve_u32(limit).into_iter().map(u64::from).collect()
}

fn sieve_u32(limit: u64) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = usize::try_from(limit).expect("sieve limit exceeds address space");
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality for every `u64`.
///
/// Miller-Rabin with the first twelve primes as witnesses is exact below
/// 3.3 * 10^24, which covers the whole type.
pub fn is_prime(m: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if m < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if m % p == 0 {
            return m == p;
        }
    }
    let mut d = m - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &w in &WITNESSES {
        let mut x = pow_mod(w, d, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `x`, if one fits in `u64`.
pub fn next_prime_after(x: u64) -> Option<u64> {
    default_sieve().next_prime_after(x)
}

/// A sieve of primes up to a fixed limit, with `u64` primality beyond it.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeSieve {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!("sieve limit {limit} < 2")));
        }
        if limit > u64::from(u32::MAX) {
            return Err(Error::InvalidArgument(format!("sieve limit {limit} too large")));
        }
        Ok(Self { limit, primes: sieve_u32(limit) })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> impl ExactSizeIterator<Item = u64> + '_ {
        self.primes.iter().map(|&p| u64::from(p))
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Number of primes `<= x`; `x` must not exceed the limit.
    pub fn pi(&self, x: u64) -> u64 {
        assert!(x <= self.limit, "pi({x}) beyond sieve limit {}", self.limit);
        self.primes.partition_point(|&p| u64::from(p) <= x) as u64
    }

    /// The `i`-th prime, 1-based (`nth(1) = 2`), if within the sieve.
    pub fn nth(&self, i: u64) -> Option<u64> {
        let idx = usize::try_from(i.checked_sub(1)?).ok()?;
        self.primes.get(idx).map(|&p| u64::from(p))
    }

    pub fn is_prime(&self, m: u64) -> bool {
        if m <= self.limit {
            u32::try_from(m).map(|m| self.primes.binary_search(&m).is_ok()).unwrap_or(false)
        } else {
            is_prime(m)
        }
    }

    pub fn next_prime_after(&self, x: u64) -> Option<u64> {
        if x < self.limit {
            let idx = self.primes.partition_point(|&p| u64::from(p) <= x);
            if let Some(&p) = self.primes.get(idx) {
                return Some(u64::from(p));
            }
        }
        let mut c = x.max(self.limit).checked_add(1)?;
        loop {
            if is_prime(c) {
                return Some(c);
            }
            c = c.checked_add(1)?;
        }
    }

    /// Primes `p` with `n/(k+1) < p <= n/k`, ascending.
    pub fn interval_primes(&self, n: u64, k: u64) -> IntervalPrimes<'_> {
        assert!(k >= 1, "k must be positive");
        let lo = n / (k + 1) + 1;
        let hi = n / k;
        IntervalPrimes { sieve: self, next: lo, hi, done: false }
    }

    /// Smallest prime in `(n/(k+1), n/k]`.
    pub fn find_interval_prime(&self, n: u64, k: u64) -> Option<u64> {
        self.interval_primes(n, k).next()
    }
}

pub struct IntervalPrimes<'a> {
    sieve: &'a PrimeSieve,
    next: u64,
    hi: u64,
    done: bool,
}

impl Iterator for IntervalPrimes<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done || self.next > self.hi {
            return None;
        }
        match self.sieve.next_prime_after(self.next - 1) {
            Some(p) if p <= self.hi => {
                match p.checked_add(1) {
                    Some(n) => self.next = n,
                    None => self.done = true,
                }
                Some(p)
            }
            _ => {
                self.done = true;
                None
            }
        }
    }
}

/// Process-wide sieve at [`DEFAULT_SIEVE_LIMIT`].
pub fn default_sieve() -> &'static PrimeSieve {
    static SIEVE: OnceLock<PrimeSieve> = OnceLock::new();
    SIEVE.get_or_init(|| PrimeSieve::new(DEFAULT_SIEVE_LIMIT).expect("default sieve"))
}

/// Smallest prime `p` with `n/(k+1) < p <= n/k`, or `None` if the interval
/// holds no prime.
pub fn find_interval_prime(n: u64, k: u64) -> Option<u64> {
    default_sieve().find_interval_prime(n, k)
}

/// Smallest prime `p > x` for real `x >= 3275`, checked against
/// `p <= x (1 + 1/(2 ln^2 x))` with outward-rounded arithmetic.
///
/// A violation would contradict the cited bound and is returned as
/// [`Error::DusartViolation`].
pub fn dusart_next(x: &ExactRational) -> Result<u64> {
    if *x < 3275 {
        return Err(Error::InvalidArgument(format!("dusart_next requires x >= 3275, got {x}")));
    }
    let start = x.floor();
    let start = u64::try_from(&start).map_err(|_| Error::Range(format!("x = {x} exceeds u64")))?;
    let p = next_prime_after(start).ok_or_else(|| Error::Range(format!("no u64 prime above {x}")))?;

    let mut prec = Precision::DEFAULT;
    loop {
        let xi = Interval::exact(x.clone(), prec);
        let ln = xi.ln()?;
        let bound = xi.mul(&Interval::one(prec).add(&ln.mul(&ln).mul_int(2).recip()?));
        let pr = ExactRational::from(p);
        if pr <= *bound.lo() {
            return Ok(p);
        }
        if pr > *bound.hi() {
            return Err(Error::DusartViolation { x: x.to_string(), p });
        }
        prec = prec
            .widen()
            .ok_or_else(|| Error::Range(format!("Dusart bound at x = {x} unresolved at maximum precision")))?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScheduleRow {
    pub k: u64,
    pub i_k: u64,
    pub p_ik: u64,
}

/// For each `k` in `2..=34`, the least index `i_k` such that
/// `k p_{i+1} < (k+1) p_i` for every `i` from `i_k` through the last prime
/// index below the sieve limit. From `p_{i_k}` upward consecutive primes are
/// close enough that every interval `(n/(k+1), n/k]` holds one.
#[derive(Debug, Clone, Serialize)]
pub struct PrimeScheduleTable {
    pub rows: Vec<ScheduleRow>,
    pub sieve_limit: u64,
    pub max_index: u64,
    pub max_prime: u64,
    #[serde(skip)]
    sieve: Arc<PrimeSieve>,
}

/// Builds the schedule table against all primes up to `sieve_limit`.
pub fn build_schedule_table(sieve_limit: u64) -> Result<PrimeScheduleTable> {
    PrimeScheduleTable::build(Arc::new(PrimeSieve::new(sieve_limit)?))
}

impl PrimeScheduleTable {
    pub fn build(sieve: Arc<PrimeSieve>) -> Result<Self> {
        let sieve_limit = sieve.limit();
        if sieve_limit < 1000 {
            return Err(Error::InvalidArgument(format!("schedule table needs sieve limit >= 1000, got {sieve_limit}")));
        }
        let primes: Vec<u64> = sieve.primes().collect();
        let max_index = primes.len() as u64;
        let max_prime = *primes.last().expect("nonempty sieve");
        // p_{max_index + 1} closes the range i <= max_index.
        let beyond = sieve.next_prime_after(max_prime).expect("prime beyond sieve");

        let p = |i: u64| -> u64 {
            if i == max_index + 1 {
                beyond
            } else {
                primes[(i - 1) as usize]
            }
        };
        let close = |k: u64, i: u64| -> bool { (k as u128) * (p(i + 1) as u128) < ((k + 1) as u128) * (p(i) as u128) };

        let mut rows = Vec::with_capacity(SCHEDULE_K_MAX as usize - 1);
        for k in 2..=SCHEDULE_K_MAX {
            if !close(k, max_index) {
                return Err(Error::ClaimViolation {
                    k,
                    n: sieve_limit,
                    reason: "gap condition fails at the top of the sieve".into(),
                });
            }
            let mut i = max_index;
            while i > 1 && close(k, i - 1) {
                i -= 1;
            }
            rows.push(ScheduleRow { k, i_k: i, p_ik: p(i) });
        }
        Ok(Self { rows, sieve_limit, max_index, max_prime, sieve })
    }

    pub fn row(&self, k: u64) -> Option<&ScheduleRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn sieve(&self) -> &PrimeSieve {
        &self.sieve
    }

    /// `k,i_k,p_ik` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,i_k,p_ik\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{}", r.k, r.i_k, r.p_ik);
        }
        s
    }

    /// Three bands of eleven columns, one line each for `k`, `i_k`, `p_{i_k}`.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for band in self.rows.chunks(11) {
            let line = |label: &str, f: &dyn Fn(&ScheduleRow) -> u64| -> String {
                let mut l = format!("{label:>7} |");
                for r in band {
                    let _ = write!(l, " {:>4} |", f(r));
                }
                l
            };
            let rule = "-".repeat(9 + 7 * band.len());
            let _ = writeln!(s, "{rule}");
            let _ = writeln!(s, "{}", line("k", &|r| r.k));
            let _ = writeln!(s, "{}", line("i_k", &|r| r.i_k));
            let _ = writeln!(s, "{}", line("p_{i_k}", &|r| r.p_ik));
        }
        let _ = writeln!(s, "{}", "-".repeat(9 + 7 * 11));
        let _ = writeln!(
            s,
            "sieve limit {}: {} primes, largest {}",
            self.sieve_limit, self.max_index, self.max_prime
        );
        s
    }
}

/// Produces a prime `p >= p_{i_k}` in `(n/(k+1), n/k]` for
/// `k p_{i_k} <= n <= sieve_limit`: either `p_{i_k}` itself, or the successor
/// of the largest prime `<= n/(k+1)`.
///
/// An error here means the table's defining property does not deliver the
/// interval prime it promises.
pub fn check_claim(k: u64, n: u64, table: &PrimeScheduleTable) -> Result<u64> {
    let row = table
        .row(k)
        .ok_or_else(|| Error::InvalidArgument(format!("k = {k} not in schedule table")))?;
    if (k as u128) * (row.p_ik as u128) > n as u128 || n > table.sieve_limit {
        return Err(Error::InvalidArgument(format!(
            "claim needs {k}*{} <= n <= {}, got n = {n}",
            row.p_ik, table.sieve_limit
        )));
    }
    if (row.p_ik as u128) * ((k + 1) as u128) > n as u128 {
        return Ok(row.p_ik);
    }
    let sieve = table.sieve();
    let floor = n / (k + 1);
    let i = sieve.pi(floor);
    if i < row.i_k {
        return Err(Error::ClaimViolation { k, n, reason: format!("index {i} below i_k = {}", row.i_k) });
    }
    let p = match sieve.nth(i + 1) {
        Some(p) => p,
        None => sieve.next_prime_after(floor).expect("prime beyond sieve"),
    };
    if (p as u128) * (k as u128) > n as u128 {
        return Err(Error::ClaimViolation { k, n, reason: format!("successor prime {p} exceeds n/k") });
    }
    Ok(p)
}
