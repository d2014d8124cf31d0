//! Optional `key = value` configuration file.
//!
//! Recognized keys are `sieve_limit` and `checkpoint_every`. Blank lines and
//! lines starting with `#` are ignored. Unknown keys are errors so typos
//! surface early.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::primes::DEFAULT_SIEVE_LIMIT;
use crate::sweep::DEFAULT_CHECKPOINT_EVERY;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub sieve_limit: u64,
    pub checkpoint_every: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self { sieve_limit: DEFAULT_SIEVE_LIMIT, checkpoint_every: DEFAULT_CHECKPOINT_EVERY }
    }
}

fn positive(key: &str, raw: &str, line: usize) -> Result<u64> {
    match raw.parse::<u64>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::Parse(format!("line {line}: {key} must be a positive integer, got {raw:?}"))),
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {line_no}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "sieve_limit" => cfg.sieve_limit = positive(key, value, line_no)?,
                "checkpoint_every" => cfg.checkpoint_every = positive(key, value, line_no)?,
                other => return Err(Error::Parse(format!("line {line_no}: unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }
}
