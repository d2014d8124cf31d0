//! End-to-end decision for a single `(a, b, n, k)`.
//!
//! The only integer values are `S(1,1) = 1/b` with `b = 1`, and
//! `S_{1,1}(3,2) = 1/1*1/2 + 1/1*1/3 + 1/2*1/3 = 1`. Certify mode backs every
//! other verdict with evidence: a bound report, a valuation certificate or an
//! exact value.

use serde::Serialize;

use crate::bounds::{lemma22_applies, ThresholdReport};
use crate::error::{Error, Result};
use crate::esf::{esf, reciprocal_sum, ProgressionParams};
use crate::padic::{find_certificate, ValuationCertificate};
use crate::rational::ExactRational;

/// Exact evaluation is attempted up to this `n`.
pub const EXACT_FALLBACK_LIMIT: u64 = 5000;

/// `S(n,1)` is computed exactly up to this `n`.
pub const K1_EXACT_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecideMode {
    Theorem,
    Certify,
}

impl std::str::FromStr for DecideMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(Self::Theorem),
            "certify" => Ok(Self::Certify),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Integer,
    NonInteger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExceptionalCase {
    /// `b = n = k = 1`, any `a`.
    B1n1k1,
    /// `a = b = 1`, `n = 3`, `k = 2`.
    A1b1n3k2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    ExceptionalCase { which: ExceptionalCase, value: ExactRational },
    ValuationCertificate { certificate: ValuationCertificate },
    BoundCertificate { report: ThresholdReport },
    ExactValue { value: ExactRational },
    K1PartialSum { value: ExactRational },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub evidence: Option<Evidence>,
    /// False only when computed evidence contradicts the exception set.
    pub theorem_consistent: bool,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn exceptional_case(params: ProgressionParams, n: u64, k: u64) -> Option<ExceptionalCase> {
    match (params.a(), params.b(), n, k) {
        (_, 1, 1, 1) => Some(ExceptionalCase::B1n1k1),
        (1, 1, 3, 2) => Some(ExceptionalCase::A1b1n3k2),
        _ => None,
    }
}

/// The verdict predicted by the exception set.
pub fn predicted_verdict(params: ProgressionParams, n: u64, k: u64) -> Verdict {
    if exceptional_case(params, n, k).is_some() {
        Verdict::Integer
    } else {
        Verdict::NonInteger
    }
}

fn verdict_of(x: &ExactRational) -> Verdict {
    if x.is_integer() {
        Verdict::Integer
    } else {
        Verdict::NonInteger
    }
}

fn certified(params: ProgressionParams, n: u64, k: u64, verdict: Verdict, evidence: Evidence) -> Decision {
    Decision {
        verdict,
        evidence: Some(evidence),
        theorem_consistent: verdict == predicted_verdict(params, n, k),
        certified: true,
        note: None,
    }
}

pub fn decide(params: ProgressionParams, n: u64, k: u64, mode: DecideMode) -> Result<Decision> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if mode == DecideMode::Theorem {
        return Ok(Decision {
            verdict: predicted_verdict(params, n, k),
            evidence: None,
            theorem_consistent: true,
            certified: false,
            note: None,
        });
    }

    if let Some(which) = exceptional_case(params, n, k) {
        let value = esf(params, n, k)?;
        return Ok(certified(params, n, k, verdict_of(&value), Evidence::ExceptionalCase { which, value }));
    }
    if k == 1 {
        return decide_k1(params, n);
    }
    let report = lemma22_applies(params, n, k)?;
    if report.certifies() {
        return Ok(certified(params, n, k, Verdict::NonInteger, Evidence::BoundCertificate { report }));
    }
    if let Some(certificate) = find_certificate(params, n, k) {
        return Ok(certified(params, n, k, Verdict::NonInteger, Evidence::ValuationCertificate { certificate }));
    }
    if n <= EXACT_FALLBACK_LIMIT {
        let value = esf(params, n, k)?;
        return Ok(certified(params, n, k, verdict_of(&value), Evidence::ExactValue { value }));
    }
    Ok(Decision {
        verdict: predicted_verdict(params, n, k),
        evidence: None,
        theorem_consistent: true,
        certified: false,
        note: Some("no desk-scale certificate: no qualifying witness prime and n too large for exact evaluation".into()),
    })
}

/// `k = 1`: `S(1,1) = 1/b`; for `n >= 2` the reciprocal sum is never an
/// integer, and is computed exactly when `n <= 10^5`.
pub fn decide_k1(params: ProgressionParams, n: u64) -> Result<Decision> {
    if n == 0 {
        return Err(Error::KOutOfRange { k: 1, n });
    }
    if n == 1 {
        let value = ExactRational::recip_of(params.b() as u128);
        let verdict = verdict_of(&value);
        let evidence = match exceptional_case(params, 1, 1) {
            Some(which) => Evidence::ExceptionalCase { which, value },
            None => Evidence::K1PartialSum { value },
        };
        return Ok(certified(params, 1, 1, verdict, evidence));
    }
    if n <= K1_EXACT_LIMIT {
        let value = reciprocal_sum(params, n)?;
        return Ok(certified(params, n, 1, verdict_of(&value), Evidence::K1PartialSum { value }));
    }
    Ok(Decision {
        verdict: Verdict::NonInteger,
        evidence: None,
        theorem_consistent: true,
        certified: false,
        note: Some("reciprocal sum beyond exact range; non-integrality taken from the known k = 1 result".into()),
    })
}
