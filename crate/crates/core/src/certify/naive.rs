//! Reference minimum by flat enumeration: every admissible tuple, every
//! window element as an explicit dot product with the coefficient table.
//! No prefix sharing, no pruning. Only for small instances.

use std::time::Instant;

use super::coefficients::{build_coefficient_table, row_count};
use super::tuples::admissible_tuples;
use super::Certificate;
use crate::error::{Error, Result};
use crate::seqcore::Modulus;

/// Largest `tuples * rows` the naive engine accepts.
pub const NAIVE_WORK_CAP: u128 = 100_000_000;

pub fn naive_min_hits(x: u32, m: Modulus, j: u32) -> Result<Certificate> {
    let spec = admissible_tuples(m, j)?;
    if x >= m.get() {
        return Err(Error::InvalidArgument(format!(
            "residue {x} is not in [0, {m})"
        )));
    }
    let work = spec.total_count.saturating_mul(row_count(j) as u128);
    if work > NAIVE_WORK_CAP {
        return Err(Error::Capacity {
            what: "naive enumeration",
            needed: work.min(u64::MAX as u128) as u64,
            limit: NAIVE_WORK_CAP as u64,
        });
    }
    let start = Instant::now();
    let table = build_coefficient_table(j)?.reduce(m);
    let mut best: Option<(u32, Vec<u32>)> = None;
    let mut examined = 0u64;
    spec.for_each(|tuple| {
        examined += 1;
        let hits = table.hits(tuple, x);
        if best.as_ref().is_none_or(|(b, _)| hits < *b) {
            best = Some((hits, tuple.to_vec()));
        }
    });
    let (e, witness) = best.expect("domain is non-empty");
    Ok(Certificate::new(
        x,
        m.get(),
        j,
        e,
        witness,
        examined,
        start.elapsed().as_secs_f64(),
        true,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn hand_checked_cases() {
        // {b1; b2, b1+b2, 2b1+b2} mod 3 always contains a zero
        let c = naive_min_hits(0, m(3), 2).unwrap();
        assert_eq!(c.e, 1);
        assert_eq!(c.tuples_examined, 9);
        assert_eq!(naive_min_hits(2, m(3), 2).unwrap().e, 0);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            naive_min_hits(0, m(3), 13),
            Err(Error::Capacity { .. })
        ));
    }
}
