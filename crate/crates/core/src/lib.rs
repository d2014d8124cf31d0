//! Exact computation and non-integrality certificates for elementary
//! symmetric functions of reciprocals of arithmetic progressions.

pub mod bounds;
pub mod config;
pub mod decider;
pub mod error;
pub mod esf;
pub mod padic;
pub mod primes;
pub mod rational;
pub mod sweep;

pub use error::{Error, Result};
pub use esf::{esf, esf_direct, reciprocal_sum, EsfState, ProgressionParams};
pub use padic::{make_certificate, verify_certificate, vp_int, vp_rat, Valuation, ValuationCertificate, VerifyMode};
pub use primes::{build_schedule_table, dusart_next, find_interval_prime, PrimeScheduleTable};
pub use rational::ExactRational;
