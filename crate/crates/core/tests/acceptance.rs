//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Oracles here are written independently of the library's
//! engines (integer common-denominator DP, subset enumeration, trial
//! division).

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use esfcheck::bounds::lemma22_applies;
use esfcheck::padic::find_certificate;
use esfcheck::primes::check_claim;
use esfcheck::sweep::{self, RunOptions, SweepSpec};
use esfcheck::{
    build_schedule_table, dusart_next, verify_certificate, EsfState, ExactRational, ProgressionParams, Valuation,
    VerifyMode,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed <= budget, || format!("{what} took {elapsed:.2?}, budget {budget:?}"))
}

fn params(a: u64, b: u64) -> ProgressionParams {
    ProgressionParams::new(a, b).unwrap()
}

fn trial_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `(P, [N_0..=N_kmax])` with `P = prod x_i` and `S(n,j) = N_j / P`.
fn common_denominator(a: u64, b: u64, n: u64, kmax: usize) -> (BigUint, Vec<BigUint>) {
    let mut p = BigUint::one();
    let mut nums = vec![BigUint::zero(); kmax + 1];
    nums[0] = BigUint::one();
    for i in 0..n {
        let x = BigUint::from(b + a * i);
        for j in (1..=kmax).rev() {
            let carried = nums[j - 1].clone();
            nums[j] = &nums[j] * &x + carried;
        }
        p *= &x;
        nums[0] = p.clone();
    }
    (p, nums)
}

fn vp(p: u64, m: &BigUint) -> i64 {
    let pb = BigUint::from(p);
    let mut m = m.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

fn criterion1() -> Outcome {
    let fixture = include_str!("fixtures/table1.csv");
    let t = Instant::now();
    let table = build_schedule_table(120_000).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let csv = table.to_csv();
    ensure(csv == fixture, || format!("table differs from fixture:\n{csv}"))?;
    ensure(table.rows.len() == 33, || format!("{} rows", table.rows.len()))?;
    within(elapsed, Duration::from_secs(1), "table build")?;
    Ok(format!("33 rows byte-identical, built in {elapsed:.2?}"))
}

fn criterion2() -> Outcome {
    let table = build_schedule_table(120_000).map_err(|e| e.to_string())?;
    let sieve = table.sieve();
    let pi = sieve.pi(120_000);
    let last = sieve.nth(11_301);
    ensure(pi == 11_301, || format!("pi(120000) = {pi}"))?;
    ensure(last == Some(119_993), || format!("p_11301 = {last:?}"))?;
    // independent count by trial division
    let count = (2..=120_000u64).filter(|&m| trial_prime(m)).count();
    let largest = (2..120_000u64).rev().find(|&m| trial_prime(m));
    ensure(count == 11_301 && largest == Some(119_993), || format!("trial division: {count}, {largest:?}"))?;
    Ok("pi(120000) = 11301, p_11301 = 119993".into())
}

fn criterion3() -> Outcome {
    let table = build_schedule_table(120_000).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let mut checks = 0u64;
    for row in &table.rows {
        let k = row.k;
        for n in k * row.p_ik..=120_000 {
            let p = check_claim(k, n, &table).map_err(|e| e.to_string())?;
            ensure(p >= row.p_ik && p * (k + 1) > n && p * k <= n && table.sieve().is_prime(p), || {
                format!("k={k}, n={n}: bad prime {p}")
            })?;
            checks += 1;
        }
    }
    let elapsed = t.elapsed();
    within(elapsed, Duration::from_secs(60), "claim scan")?;
    Ok(format!("{checks} (k, n) pairs, zero failures, {elapsed:.2?}"))
}

fn single_hit(report: &sweep::SweepReport) -> Result<(), String> {
    ensure(report.complete, || "sweep incomplete".into())?;
    ensure(report.anomalies.is_empty(), || format!("anomalies: {:?}", report.anomalies))?;
    let hits: Vec<_> = report.integer_hits.iter().map(|h| (h.a, h.b, h.n, h.k, h.value.to_string())).collect();
    ensure(hits == [(1, 1, 3, 2, "1".to_string())], || format!("hits: {hits:?}"))?;
    ensure(report.passed(), || "report not passed".into())
}

fn criterion4() -> Outcome {
    let t = Instant::now();
    let smoke = sweep::run(&SweepSpec::program2().smoke(), &RunOptions::default()).map_err(|e| e.to_string())?;
    let smoke_time = t.elapsed();
    single_hit(&smoke)?;
    within(smoke_time, Duration::from_secs(60), "smoke box")?;

    let t = Instant::now();
    let full = sweep::run_program2().map_err(|e| e.to_string())?;
    let full_time = t.elapsed();
    single_hit(&full)?;
    within(full_time, Duration::from_secs(30 * 60), "full box")?;
    Ok(format!(
        "one hit (1,1,3,2) = 1; smoke {} cells in {smoke_time:.2?}, full {} cells in {full_time:.2?}",
        smoke.cells_checked, full.cells_checked
    ))
}

fn criterion5() -> Outcome {
    let table = build_schedule_table(120_000).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let report = sweep::run_program1(&table).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(report.complete && report.anomalies.is_empty(), || "incomplete or anomalous".into())?;
    ensure(report.integer_hits.is_empty(), || format!("hits: {:?}", report.integer_hits))?;
    ensure(report.passed(), || "report not passed".into())?;
    within(elapsed, Duration::from_secs(10 * 60), "program 1")?;
    let na = report.na_table.as_ref().ok_or("no n_a table")?;
    let diffs: Vec<String> = na
        .iter()
        .filter(|r| r.discrepancy)
        .map(|r| format!("a={}: published {:?}, recomputed {}", r.a, r.published, r.recomputed))
        .collect();
    Ok(format!("zero hits over {} cells in {elapsed:.2?}; n_a discrepancies: {}", report.cells_checked, diffs.join("; ")))
}

fn criterion6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    let mut tries = 0;
    while done < 500 {
        tries += 1;
        ensure(tries < 500_000, || format!("only {done} certified instances found"))?;
        let (a, b) = (rng.gen_range(1..=12u64), rng.gen_range(1..=30u64));
        let n = rng.gen_range(4..=2000u64);
        let k = rng.gen_range(2..=(n / 4).clamp(2, 40));
        let Some(cert) = find_certificate(params(a, b), n, k) else { continue };
        let rep = verify_certificate(&cert, VerifyMode::Exhaustive).map_err(|e| e.to_string())?;
        ensure(rep.passed && rep.exact_valuation == Some(Valuation::Finite(-(k as i64))), || {
            format!("({a},{b},{n},{k}) p={}: {rep:?}", cert.p)
        })?;
        let (den, nums) = common_denominator(a, b, n, k as usize);
        let v = vp(cert.p, &nums[k as usize]) - vp(cert.p, &den);
        ensure(v == -(k as i64), || format!("({a},{b},{n},{k}) p={}: oracle valuation {v}", cert.p))?;
        done += 1;
    }
    Ok(format!("500 certificates, v_p(S) = -k exactly ({tries} draws)"))
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut done, mut tries, mut small_regime) = (0, 0, 0);
    while done < 500 {
        tries += 1;
        ensure(tries < 2_000_000, || format!("only {done} bound-certified instances found"))?;
        let a = rng.gen_range(1..=6u64);
        let b = rng.gen_range(1..=60u64);
        let n = rng.gen_range(2..=300u64);
        let k = rng.gen_range(2..=n);
        let rep = lemma22_applies(params(a, b), n, k).map_err(|e| e.to_string())?;
        if !rep.certifies() {
            continue;
        }
        let (den, nums) = common_denominator(a, b, n, k as usize);
        let num = &nums[k as usize];
        ensure(!num.is_zero() && *num < den, || format!("({a},{b},{n},{k}) certified but S >= 1"))?;
        small_regime += rep.small_regime as u32;
        done += 1;
    }
    Ok(format!("500 certified instances satisfy 0 < S < 1 ({small_regime} via the small-n flag)"))
}

fn criterion8() -> Outcome {
    let t = Instant::now();
    let mut identities = 0;
    for a in 1..=10u64 {
        for b in 1..=10u64 {
            let mut state = EsfState::new(params(a, b), 12).map_err(|e| e.to_string())?;
            for n in 1..=12u64 {
                state.advance();
                let xs: Vec<u128> = (0..n).map(|i| (b + a * i) as u128).collect();
                let den: u128 = xs.iter().product();
                // subset of size k contributes prod(complement) / den
                let mut sums = vec![0u128; n as usize + 1];
                for mask in 0u32..(1 << n) {
                    let comp: u128 = (0..n as usize).filter(|&i| mask & (1 << i) == 0).map(|i| xs[i]).product();
                    sums[mask.count_ones() as usize] += comp;
                }
                for (k, &sum) in sums.iter().enumerate().skip(1) {
                    let want = ExactRational::new(BigInt::from(sum), BigInt::from(den)).map_err(|e| e.to_string())?;
                    ensure(state.value(k) == want, || format!("({a},{b},{n},{k}): {} != {want}", state.value(k)))?;
                    identities += 1;
                }
            }
        }
    }
    let elapsed = t.elapsed();
    within(elapsed, Duration::from_secs(10), "recurrence identities")?;
    Ok(format!("{identities} identities in {elapsed:.2?}"))
}

fn criterion9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let x = rng.gen_range(3275..=1_000_000u64);
        let p = dusart_next(&ExactRational::from(x)).map_err(|e| e.to_string())?;
        ensure(trial_prime(p) && p > x && (x + 1..p).all(|m| !trial_prime(m)), || {
            format!("x={x}: {p} is not the next prime")
        })?;
        let lx = (x as f64).ln();
        ensure((p as f64) <= x as f64 * (1.0 + 1.0 / (2.0 * lx * lx)), || format!("x={x}: p={p} above bound"))?;
    }
    Ok("10000 samples, zero violations".into())
}

fn criterion10() -> Outcome {
    let mut found = Vec::new();
    for a in 1..=5u64 {
        for b in 1..=5u64 {
            let mut state = EsfState::new(params(a, b), 40).map_err(|e| e.to_string())?;
            for n in 1..=40u64 {
                state.advance();
                let (den, nums) = common_denominator(a, b, n, n as usize);
                for k in 1..=n {
                    let oracle = nums[k as usize].is_multiple_of(&den);
                    ensure(state.is_integer(k as usize) == oracle, || format!("({a},{b},{n},{k}) disagrees"))?;
                    if oracle {
                        found.push((a, b, n, k));
                    }
                }
            }
        }
    }
    let mut expected: Vec<_> = (1..=5u64).map(|a| (a, 1, 1, 1)).collect();
    expected.push((1, 1, 3, 2));
    expected.sort_unstable();
    found.sort_unstable();
    ensure(found == expected, || format!("integer cells {found:?}"))?;
    Ok(format!("integer cells exactly {found:?}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("schedule table reproduction", criterion1),
        ("prime-count anchor", criterion2),
        ("interval prime claim, exhaustive", criterion3),
        ("a=1 sweep, single integer cell", criterion4),
        ("a=2..12 sweep, no integer cells", criterion5),
        ("valuation certificates vs exact valuation", criterion6),
        ("threshold certificates vs exact value", criterion7),
        ("recurrence vs subset enumeration", criterion8),
        ("Dusart spot-check", criterion9),
        ("theorem box brute force", criterion10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail} [{:.2?}]", i + 1, t.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail} [{:.2?}]", i + 1, t.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
