use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use esfcheck::bounds::lemma22_applies;
use esfcheck::config::Config;
use esfcheck::decider::{decide, DecideMode};
use esfcheck::padic::find_certificate;
use esfcheck::sweep::{self, IntRange, RunOptions, SweepSpec};
use esfcheck::{build_schedule_table, esf, verify_certificate, Error, ProgressionParams, ValuationCertificate, VerifyMode};

mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAIL: u8 = 1;
    pub const UNCERTIFIED: u8 = 2;
    pub const NO_WITNESS: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
}

#[derive(Parser)]
#[command(name = "esfcheck", version, about = "Exact elementary symmetric functions of reciprocal progressions and their integrality")]
struct Cli {
    /// key = value file with sieve_limit and checkpoint_every
    #[arg(long, global = true, env = "ESFCHECK_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Query {
    #[arg(long)]
    a: u64,
    #[arg(long)]
    b: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComputeFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theorem,
    Certify,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyModeArg {
    Fast,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProgramArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of S_{a,b}(n,k)
    Compute {
        #[command(flatten)]
        q: Query,
        #[arg(long, value_enum, default_value = "text")]
        format: ComputeFormat,
    },
    /// Integer or not, with evidence in certify mode
    Decide {
        #[command(flatten)]
        q: Query,
        #[arg(long, value_enum, default_value = "certify")]
        mode: ModeArg,
    },
    /// Search for a witness prime and emit its valuation certificate
    Witness {
        #[command(flatten)]
        q: Query,
    },
    /// Check a certificate file (raw or as emitted by `witness`)
    Verify {
        certificate: PathBuf,
        #[arg(long, value_enum, default_value = "fast")]
        mode: VerifyModeArg,
    },
    /// The prime schedule table
    Table1 {
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
    },
    /// Threshold report for the bound certificate
    CheckBounds {
        #[command(flatten)]
        q: Query,
    },
    /// Exhaustive integrality sweep over a box
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    program: ProgramArg,
    /// a or lo..hi (custom only)
    #[arg(long)]
    a: Option<String>,
    /// b or lo..hi (custom only)
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    k_max: Option<u64>,
    /// Checkpoint directory; an interrupted run resumes from it
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Clip the box to n <= 500
    #[arg(long)]
    smoke: bool,
    /// Worker threads (0 = all cores)
    #[arg(long, env = "ESFCHECK_JOBS", default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
    /// Also write the CSV report here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct OutputEnvelope<T: Serialize> {
    command: &'static str,
    version: &'static str,
    payload: T,
    elapsed_ms: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Json(_) | Error::Io(_) | Error::Checkpoint(_) => exit::DATA,
            Error::ClaimViolation { .. } | Error::DusartViolation { .. } => exit::VERIFY_FAIL,
            _ => exit::USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: exit::USAGE, message: message.into() }
}

type CmdResult = std::result::Result<u8, Failure>;

struct Out {
    command: &'static str,
    started: Instant,
}

impl Out {
    fn emit<T: Serialize>(&self, payload: T) {
        let env = OutputEnvelope {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            payload,
            elapsed_ms: self.started.elapsed().as_millis() as u64,
        };
        println!("{}", serde_json::to_string_pretty(&env).expect("envelope serializes"));
    }
}

fn params(q: &Query) -> std::result::Result<ProgressionParams, Failure> {
    Ok(ProgressionParams::new(q.a, q.b)?)
}

fn checked(q: &Query) -> std::result::Result<ProgressionParams, Failure> {
    if q.k == 0 || q.k > q.n {
        return Err(Error::KOutOfRange { k: q.k, n: q.n }.into());
    }
    params(q)
}

fn cmd_compute(out: &Out, q: Query, format: ComputeFormat) -> CmdResult {
    let p = checked(&q)?;
    let value = esf(p, q.n, q.k)?;
    let decimal = value.to_decimal(12);
    match format {
        ComputeFormat::Text => println!("{value}\n{decimal}"),
        ComputeFormat::Json => out.emit(json!({
            "a": q.a.to_string(), "b": q.b.to_string(), "n": q.n.to_string(), "k": q.k.to_string(),
            "value": value, "decimal": decimal, "is_integer": value.is_integer(),
        })),
    }
    Ok(exit::OK)
}

fn cmd_decide(out: &Out, q: Query, mode: ModeArg) -> CmdResult {
    let p = checked(&q)?;
    let mode = match mode {
        ModeArg::Theorem => DecideMode::Theorem,
        ModeArg::Certify => DecideMode::Certify,
    };
    let d = decide(p, q.n, q.k, mode)?;
    let code = if mode == DecideMode::Certify && !d.certified { exit::UNCERTIFIED } else { exit::OK };
    out.emit(&d);
    Ok(code)
}

fn cmd_witness(out: &Out, q: Query) -> CmdResult {
    let p = checked(&q)?;
    match find_certificate(p, q.n, q.k) {
        Some(cert) => {
            out.emit(&cert);
            Ok(exit::OK)
        }
        None => {
            out.emit(json!({
                "found": false,
                "note": format!("no prime in (n/(k+1), n/k] with p > ak + 2a + 2b/p for a={}, b={}, n={}, k={}", q.a, q.b, q.n, q.k),
            }));
            Ok(exit::NO_WITNESS)
        }
    }
}

/// Accepts a bare certificate or an envelope wrapping one.
fn parse_certificate(text: &str) -> std::result::Result<ValuationCertificate, Failure> {
    let data = |m: String| Failure { code: exit::DATA, message: m };
    let v: Value = serde_json::from_str(text).map_err(|e| data(format!("malformed certificate JSON: {e}")))?;
    let inner = match v.get("payload") {
        Some(p) if v.get("command").is_some() => p.clone(),
        _ => v,
    };
    serde_json::from_value(inner).map_err(|e| data(format!("not a valuation certificate: {e}")))
}

fn cmd_verify(out: &Out, path: PathBuf, mode: VerifyModeArg) -> CmdResult {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure { code: exit::DATA, message: format!("{}: {e}", path.display()) })?;
    let cert = parse_certificate(&text)?;
    let mode = match mode {
        VerifyModeArg::Fast => VerifyMode::Fast,
        VerifyModeArg::Exhaustive => VerifyMode::Exhaustive,
    };
    let report = verify_certificate(&cert, mode)?;
    let code = if report.passed { exit::OK } else { exit::VERIFY_FAIL };
    out.emit(&report);
    Ok(code)
}

fn cmd_table1(out: &Out, cfg: &Config, format: TableFormat) -> CmdResult {
    let table = build_schedule_table(cfg.sieve_limit)?;
    match format {
        TableFormat::Csv => print!("{}", table.to_csv()),
        TableFormat::Text => print!("{}", table.render_text()),
        TableFormat::Json => out.emit(&table),
    }
    Ok(exit::OK)
}

fn cmd_check_bounds(out: &Out, q: Query) -> CmdResult {
    let p = params(&q)?;
    let report = lemma22_applies(p, q.n, q.k)?;
    out.emit(&report);
    Ok(exit::OK)
}

fn parse_range(flag: &str, raw: &str) -> std::result::Result<IntRange, Failure> {
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| usage(format!("--{flag}: expected N or LO..HI, got {raw:?}")));
    let (lo, hi) = match raw.split_once("..") {
        Some((lo, hi)) => (num(lo)?, num(hi.trim_start_matches('='))?),
        None => {
            let v = num(raw)?;
            (v, v)
        }
    };
    Ok(IntRange::new(lo, hi)?)
}

fn cmd_sweep(out: &Out, cfg: &Config, args: SweepArgs) -> CmdResult {
    let custom_flags = args.a.is_some() || args.b.is_some() || args.n_max.is_some() || args.k_max.is_some();
    let mut spec = match args.program {
        ProgramArg::One | ProgramArg::Two if custom_flags => {
            return Err(usage("--a/--b/--n-max/--k-max apply only to --program custom"));
        }
        ProgramArg::One => SweepSpec::program1(&build_schedule_table(cfg.sieve_limit)?)?,
        ProgramArg::Two => SweepSpec::program2(),
        ProgramArg::Custom => {
            let a = parse_range("a", args.a.as_deref().ok_or_else(|| usage("--program custom needs --a"))?)?;
            let b = parse_range("b", args.b.as_deref().ok_or_else(|| usage("--program custom needs --b"))?)?;
            let n_max = args.n_max.ok_or_else(|| usage("--program custom needs --n-max"))?;
            SweepSpec::custom(a, b, n_max, args.k_max)?
        }
    };
    if args.smoke {
        spec = spec.smoke();
    }
    spec.checkpoint_every = cfg.checkpoint_every;
    spec.checkpoint_path = args.checkpoint;

    let mut report = sweep::run(&spec, &RunOptions { jobs: args.jobs, stop_after_checkpoints: None })?;
    if matches!(args.program, ProgramArg::One) {
        report.na_table = Some(esfcheck::bounds::na_table(&build_schedule_table(cfg.sieve_limit)?)?);
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv())
            .map_err(|e| Failure { code: exit::DATA, message: format!("{}: {e}", path.display()) })?;
    }
    match args.format {
        ReportFormat::Json => out.emit(&report),
        ReportFormat::Csv => print!("{}", report.to_csv()),
    }
    Ok(if report.passed() { exit::OK } else { exit::VERIFY_FAIL })
}

fn run(cli: Cli) -> CmdResult {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let started = Instant::now();
    let name = match &cli.command {
        Command::Compute { .. } => "compute",
        Command::Decide { .. } => "decide",
        Command::Witness { .. } => "witness",
        Command::Verify { .. } => "verify",
        Command::Table1 { .. } => "table1",
        Command::CheckBounds { .. } => "check-bounds",
        Command::Sweep(_) => "sweep",
    };
    let out = Out { command: name, started };
    match cli.command {
        Command::Compute { q, format } => cmd_compute(&out, q, format),
        Command::Decide { q, mode } => cmd_decide(&out, q, mode),
        Command::Witness { q } => cmd_witness(&out, q),
        Command::Verify { certificate, mode } => cmd_verify(&out, certificate, mode),
        Command::Table1 { format } => cmd_table1(&out, &cfg, format),
        Command::CheckBounds { q } => cmd_check_bounds(&out, q),
        Command::Sweep(args) => cmd_sweep(&out, &cfg, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(cli) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("esfcheck: {}", f.message);
            f.code
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
