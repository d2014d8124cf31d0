//! Exhaustive integrality sweeps over boxes of `(a, b, n, k)`.
//!
//! Work is split into chains, one per `(a, b)`. A chain streams `n` upward
//! through one [`EsfState`] and tests every `S(n,k)` in its `k` range, so a
//! chain is sequential and distinct chains run in parallel.

pub mod checkpoint;
pub mod oracle;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, NaReport};
use crate::decider::{decide_k1, exceptional_case, Verdict, K1_EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::esf::{EsfState, ProgressionParams};
use crate::padic::{find_certificate, verify_certificate, Valuation, VerifyMode};
use crate::primes::PrimeScheduleTable;
use crate::rational::ExactRational;

use checkpoint::CheckpointDir;

pub const DEFAULT_CHECKPOINT_EVERY: u64 = 500;
pub const SMOKE_N_MAX: u64 = 500;
const CROSS_CHECK_EVERY: u64 = 1000;
const CROSS_CHECK_N_MAX: u64 = 200;
const CERTIFICATE_SAMPLES: u64 = 1000;

pub const PROGRAM2_B_MAX: u64 = 44;
pub const PROGRAM2_N_MAX: u64 = 7612;
pub const PROGRAM2_K_MAX: u64 = 23;

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: u64,
    pub hi: u64,
}

impl IntRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!("empty or nonpositive range {lo}..={hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn iter(self) -> std::ops::RangeInclusive<u64> {
        self.lo..=self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Program {
    Program1,
    Program2,
    Custom,
}

/// Per-`a` limits overriding the uniform ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerA {
    pub a: u64,
    pub b_max: u64,
    pub n_max: u64,
    pub k_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub program: Program,
    pub a_range: IntRange,
    pub b_range: IntRange,
    pub n_max: u64,
    /// `k_max` is clipped to `n` cell by cell.
    pub k_range: IntRange,
    pub per_a: Vec<PerA>,
    pub smoke: bool,
    pub checkpoint_every: u64,
    #[serde(skip)]
    pub checkpoint_path: Option<PathBuf>,
    pub cross_check_every: u64,
    pub certificate_samples: u64,
}

/// One `(a, b)` chain and its box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChainSpec {
    pub a: u64,
    pub b: u64,
    pub n_max: u64,
    pub k_min: u64,
    pub k_max: u64,
}

impl ChainSpec {
    fn params(&self) -> ProgressionParams {
        ProgressionParams::new(self.a, self.b).expect("validated spec")
    }

    fn k_hi(&self, n: u64) -> u64 {
        self.k_max.min(n)
    }

    /// Cells with index `n' <= n`.
    fn cells_through(&self, n: u64) -> u64 {
        (1..=n).map(|m| (self.k_hi(m) + 1).saturating_sub(self.k_min)).sum()
    }
}

impl SweepSpec {
    fn base(program: Program, a_range: IntRange, b_range: IntRange, n_max: u64, k_range: IntRange) -> Self {
        Self {
            program,
            a_range,
            b_range,
            n_max,
            k_range,
            per_a: Vec::new(),
            smoke: false,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            checkpoint_path: None,
            cross_check_every: CROSS_CHECK_EVERY,
            certificate_samples: CERTIFICATE_SAMPLES,
        }
    }

    /// `a` in `2..=12`, `b <= min(27, b cap)`, `n < max(published, recomputed) n_a`,
    /// `2 <= k <= k_a`.
    pub fn program1(table: &PrimeScheduleTable) -> Result<Self> {
        let na = bounds::na_table(table)?;
        let per_a: Vec<PerA> = na
            .iter()
            .map(|r| PerA { a: r.a, b_max: r.b_max, n_max: r.operational - 1, k_max: r.k_a })
            .collect();
        let n_max = per_a.iter().map(|p| p.n_max).max().unwrap_or(1);
        let k_max = per_a.iter().map(|p| p.k_max).max().unwrap_or(2);
        let b_max = per_a.iter().map(|p| p.b_max).max().unwrap_or(1);
        let mut s = Self::base(
            Program::Program1,
            IntRange::new(2, 12)?,
            IntRange::new(1, b_max)?,
            n_max,
            IntRange::new(2, k_max)?,
        );
        s.per_a = per_a;
        Ok(s)
    }

    /// `a = 1`, `b` in `1..=44`, `n <= 7612`, `2 <= k <= 23`.
    pub fn program2() -> Self {
        Self::base(
            Program::Program2,
            IntRange { lo: 1, hi: 1 },
            IntRange { lo: 1, hi: PROGRAM2_B_MAX },
            PROGRAM2_N_MAX,
            IntRange { lo: 2, hi: PROGRAM2_K_MAX },
        )
    }

    /// An arbitrary box; `k` runs from 1 to `k_max` (default `n_max`).
    pub fn custom(a_range: IntRange, b_range: IntRange, n_max: u64, k_max: Option<u64>) -> Result<Self> {
        let k_range = IntRange::new(1, k_max.unwrap_or(n_max))?;
        let s = Self::base(Program::Custom, a_range, b_range, n_max, k_range);
        s.validate()?;
        Ok(s)
    }

    /// Caps `n` at 500 everywhere.
    pub fn smoke(mut self) -> Self {
        self.smoke = true;
        self.n_max = self.n_max.min(SMOKE_N_MAX);
        for p in &mut self.per_a {
            p.n_max = p.n_max.min(SMOKE_N_MAX);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        IntRange::new(self.a_range.lo, self.a_range.hi)?;
        IntRange::new(self.b_range.lo, self.b_range.hi)?;
        IntRange::new(self.k_range.lo, self.k_range.hi)?;
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be positive".into()));
        }
        if self.checkpoint_every == 0 || self.cross_check_every == 0 {
            return Err(Error::InvalidArgument("cadences must be positive".into()));
        }
        Ok(())
    }

    pub fn chains(&self) -> Vec<ChainSpec> {
        let mut out = Vec::new();
        for a in self.a_range.iter() {
            let over = self.per_a.iter().find(|p| p.a == a);
            let b_hi = over.map_or(self.b_range.hi, |p| p.b_max.min(self.b_range.hi));
            let n_max = over.map_or(self.n_max, |p| p.n_max.min(self.n_max));
            let k_max = over.map_or(self.k_range.hi, |p| p.k_max.min(self.k_range.hi));
            for b in self.b_range.lo..=b_hi {
                out.push(ChainSpec { a, b, n_max, k_min: self.k_range.lo, k_max });
            }
        }
        out
    }
}

/// Cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub a: u64,
    pub b: u64,
    pub n: u64,
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub a: u64,
    pub b: u64,
    pub n: u64,
    pub k: u64,
    pub value: ExactRational,
}

impl Hit {
    pub fn cell(&self) -> CellId {
        CellId { a: self.a, b: self.b, n: self.n, k: self.k }
    }
}

/// Running totals of one chain; persisted alongside checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainProgress {
    pub chain: ChainSpec,
    pub n_done: u64,
    pub cells_checked: u64,
    pub hits: Vec<Hit>,
    pub cross_checks: u64,
    pub certificate_checks: u64,
    pub anomalies: Vec<String>,
    pub done: bool,
    #[serde(default)]
    pub resumed: bool,
}

impl ChainProgress {
    fn new(chain: ChainSpec) -> Self {
        Self {
            chain,
            n_done: 0,
            cells_checked: 0,
            hits: Vec::new(),
            cross_checks: 0,
            certificate_checks: 0,
            anomalies: Vec::new(),
            done: false,
            resumed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub a: u64,
    pub b: u64,
    pub n_max: u64,
    pub k_min: u64,
    pub k_max: u64,
    pub cells_checked: u64,
    pub integer_hits: u64,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    /// Every integer cell found, in lexicographic order.
    pub integer_hits: Vec<Hit>,
    /// The exception-set cells inside the box.
    pub predicted_hits: Vec<CellId>,
    pub matches_prediction: bool,
    /// Hits outside the exception set.
    pub theorem_inconsistent: Vec<CellId>,
    pub cells_checked: u64,
    pub cross_checks: u64,
    pub certificate_checks: u64,
    pub anomalies: Vec<String>,
    pub complete: bool,
    pub chains: Vec<ChainSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub na_table: Option<Vec<NaReport>>,
    pub resumed_from: Option<String>,
    pub wall_time_ms: u64,
}

impl SweepReport {
    /// Finished, hit set equal to the prediction, no cross-check anomalies.
    pub fn passed(&self) -> bool {
        self.complete && self.matches_prediction && self.anomalies.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per chain.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,n_max,k_min,k_max,cells_checked,integer_hits,complete\n");
        for c in &self.chains {
            let hits: Vec<String> = self
                .integer_hits
                .iter()
                .filter(|h| h.a == c.a && h.b == c.b)
                .map(|h| format!("{}:{}={}", h.n, h.k, h.value))
                .collect();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                c.a,
                c.b,
                c.n_max,
                c.k_min,
                c.k_max,
                c.cells_checked,
                hits.join(";"),
                c.complete
            );
        }
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 means the rayon default.
    pub jobs: usize,
    /// Interrupts the run once this many checkpoints have been written.
    pub stop_after_checkpoints: Option<u64>,
}

struct StopControl {
    written: AtomicU64,
    limit: Option<u64>,
    stopped: AtomicBool,
}

impl StopControl {
    /// Records a checkpoint; true when the run should halt.
    fn tick(&self) -> bool {
        let w = self.written.fetch_add(1, Ordering::SeqCst) + 1;
        if self.limit.is_some_and(|l| w >= l) {
            self.stopped.store(true, Ordering::SeqCst);
        }
        self.halted()
    }

    fn halted(&self) -> bool {
        self.stopped.load(Ordering::SeqCst)
    }
}

fn certificate_targets(spec: &SweepSpec, chain: &ChainSpec, per_chain: u64) -> Vec<(u64, u64)> {
    let k_lo = chain.k_min.max(2);
    if per_chain == 0 || chain.n_max < k_lo {
        return Vec::new();
    }
    let seed = (chain.a << 32) ^ chain.b ^ ((spec.program as u64) << 60);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = chain.params();
    let mut out = Vec::new();
    for _ in 0..per_chain * 20 {
        if out.len() as u64 >= per_chain {
            break;
        }
        let n = rng.gen_range(k_lo..=chain.n_max);
        let k_hi = chain.k_hi(n);
        if k_hi < k_lo {
            continue;
        }
        let k = rng.gen_range(k_lo..=k_hi);
        if !out.contains(&(n, k)) && find_certificate(params, n, k).is_some() {
            out.push((n, k));
        }
    }
    out.sort_unstable();
    out
}

fn run_chain(
    spec: &SweepSpec,
    chain: ChainSpec,
    per_chain_samples: u64,
    dir: Option<&CheckpointDir>,
    stop: &StopControl,
) -> Result<ChainProgress> {
    let params = chain.params();
    let (mut prog, mut state) = match dir.map(|d| d.load(&chain)).transpose()?.flatten() {
        Some((mut p, st)) => {
            p.resumed = true;
            match st {
                None => return Ok(p),
                Some(st) => (p, st),
            }
        }
        None => (ChainProgress::new(chain), EsfState::new(params, chain.k_max as usize)?),
    };

    let targets = certificate_targets(spec, &chain, per_chain_samples);
    let mut ti = targets.partition_point(|&(n, _)| n <= prog.n_done);
    let mut cell = chain.cells_through(prog.n_done);

    while state.n() < chain.n_max {
        if stop.halted() {
            return Ok(prog);
        }
        state.advance();
        let n = state.n();
        for k in chain.k_min..=chain.k_hi(n) {
            let integer = if k == 1 && n > K1_EXACT_LIMIT {
                decide_k1(params, n)?.verdict == Verdict::Integer
            } else {
                state.is_integer(k as usize)
            };
            if integer {
                prog.hits.push(Hit { a: chain.a, b: chain.b, n, k, value: state.value(k as usize) });
            }
            if n <= CROSS_CHECK_N_MAX && cell % spec.cross_check_every == 0 {
                let reference = oracle::reference_value(params, n, k)?;
                if reference != state.value(k as usize) {
                    prog.anomalies.push(format!("streaming value differs from reference at ({}, {}, {n}, {k})", chain.a, chain.b));
                }
                prog.cross_checks += 1;
            }
            cell += 1;
        }
        while ti < targets.len() && targets[ti].0 == n {
            let k = targets[ti].1;
            ti += 1;
            let Some(cert) = find_certificate(params, n, k) else { continue };
            let fast = verify_certificate(&cert, VerifyMode::Fast)?.passed;
            let v = state.valuation(cert.p, k as usize);
            if !fast || v != Valuation::Finite(-(k as i64)) {
                prog.anomalies.push(format!(
                    "certificate p = {} at ({}, {}, {n}, {k}) disagrees with exact valuation {v}",
                    cert.p, chain.a, chain.b
                ));
            }
            prog.certificate_checks += 1;
        }
        prog.n_done = n;
        prog.cells_checked = cell;
        if let Some(d) = dir {
            if n % spec.checkpoint_every == 0 && n < chain.n_max {
                d.save(&chain, &prog, Some(&state))?;
                if stop.tick() {
                    return Ok(prog);
                }
            }
        }
    }
    prog.done = true;
    if let Some(d) = dir {
        d.finish(&chain, &prog)?;
    }
    Ok(prog)
}

fn predicted(chain: &ChainSpec) -> Vec<CellId> {
    let params = chain.params();
    let mut out = Vec::new();
    for (n, k) in [(1u64, 1u64), (3, 2)] {
        if n <= chain.n_max
            && (chain.k_min..=chain.k_hi(n)).contains(&k)
            && exceptional_case(params, n, k).is_some()
        {
            out.push(CellId { a: chain.a, b: chain.b, n, k });
        }
    }
    out
}

/// Runs `spec` with explicit execution options.
pub fn run(spec: &SweepSpec, opts: &RunOptions) -> Result<SweepReport> {
    spec.validate()?;
    let started = Instant::now();
    let chains = spec.chains();
    if chains.is_empty() {
        return Err(Error::InvalidArgument("sweep box has no chains".into()));
    }
    let dir = match &spec.checkpoint_path {
        Some(p) => Some(CheckpointDir::open(p, &serde_json::to_string_pretty(spec)?)?),
        None => None,
    };
    let per_chain = spec.certificate_samples.div_ceil(chains.len() as u64);
    let stop = StopControl { written: AtomicU64::new(0), limit: opts.stop_after_checkpoints, stopped: AtomicBool::new(false) };

    // heaviest chains first for load balance; results are re-sorted below
    let mut order = chains.clone();
    order.sort_by_key(|c| std::cmp::Reverse((c.n_max * c.k_max, c.a, c.b)));
    let work = || -> Result<Vec<ChainProgress>> {
        order
            .par_iter()
            .with_max_len(1)
            .map(|c| run_chain(spec, *c, per_chain, dir.as_ref(), &stop))
            .collect()
    };
    let mut results = if opts.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?
    } else {
        work()?
    };
    results.sort_by_key(|p| p.chain);

    let mut hits: Vec<Hit> = results.iter().flat_map(|p| p.hits.iter().cloned()).collect();
    hits.sort_by_key(Hit::cell);
    let predicted_hits: Vec<CellId> = chains.iter().flat_map(predicted).collect();
    let found: Vec<CellId> = hits.iter().map(Hit::cell).collect();
    let complete = results.iter().all(|p| p.done);
    let theorem_inconsistent: Vec<CellId> = found.iter().filter(|c| !predicted_hits.contains(c)).copied().collect();
    let resumed_from = (results.iter().any(|p| p.resumed))
        .then(|| dir.as_ref().map(|d| d.root().display().to_string()))
        .flatten();

    Ok(SweepReport {
        spec: spec.clone(),
        matches_prediction: found == predicted_hits || (!complete && theorem_inconsistent.is_empty()),
        integer_hits: hits,
        predicted_hits,
        theorem_inconsistent,
        cells_checked: results.iter().map(|p| p.cells_checked).sum(),
        cross_checks: results.iter().map(|p| p.cross_checks).sum(),
        certificate_checks: results.iter().map(|p| p.certificate_checks).sum(),
        anomalies: results.iter().flat_map(|p| p.anomalies.iter().cloned()).collect(),
        complete,
        chains: results
            .iter()
            .map(|p| ChainSummary {
                a: p.chain.a,
                b: p.chain.b,
                n_max: p.chain.n_max,
                k_min: p.chain.k_min,
                k_max: p.chain.k_max,
                cells_checked: p.cells_checked,
                integer_hits: p.hits.len() as u64,
                complete: p.done,
            })
            .collect(),
        na_table: None,
        resumed_from,
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

pub fn run_program1(table: &PrimeScheduleTable) -> Result<SweepReport> {
    let spec = SweepSpec::program1(table)?;
    let mut r = run(&spec, &RunOptions::default())?;
    r.na_table = Some(bounds::na_table(table)?);
    Ok(r)
}

pub fn run_program2() -> Result<SweepReport> {
    run(&SweepSpec::program2(), &RunOptions::default())
}

pub fn run_custom(spec: SweepSpec) -> Result<SweepReport> {
    run(&spec, &RunOptions::default())
}
