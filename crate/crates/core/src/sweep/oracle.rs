//! Independent reference values for cross-checking the streaming engine.

use crate::error::Result;
use crate::esf::{esf_direct, ProgressionParams, DIRECT_ENUMERATION_LIMIT};
use crate::rational::ExactRational;

/// The textbook recurrence on reduced fractions, one row at a time.
/// Shares no code with the integer-numerator engine.
pub fn plain_recurrence(params: ProgressionParams, n: u64, k: u64) -> ExactRational {
    let k = k as usize;
    let mut row = vec![ExactRational::zero(); k + 1];
    row[0] = ExactRational::one();
    for i in 0..n {
        let inv = ExactRational::recip_of(params.term(i));
        for j in (1..=k.min(i as usize + 1)).rev() {
            let add = &row[j - 1] * &inv;
            row[j] = &row[j] + &add;
        }
    }
    row.swap_remove(k)
}

/// `esf_direct` where it is allowed, the plain recurrence beyond.
pub fn reference_value(params: ProgressionParams, n: u64, k: u64) -> Result<ExactRational> {
    if n <= DIRECT_ENUMERATION_LIMIT {
        esf_direct(params, n, k)
    } else {
        Ok(plain_recurrence(params, n, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_enumeration() {
        for (a, b) in [(1, 1), (3, 2), (7, 11)] {
            let p = ProgressionParams::new(a, b).unwrap();
            for n in 1..=10 {
                for k in 1..=n {
                    assert_eq!(plain_recurrence(p, n, k), esf_direct(p, n, k).unwrap());
                }
            }
        }
    }
}
