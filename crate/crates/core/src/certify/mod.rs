//! Lower bounds on residue densities from window sets.
//!
//! For `1 <= i <= j` the runs `a(2^i k + 1), ..., a(2^i k + 2^i - 1)` are
//! determined by the `j` base elements `a(2^s k + 1)` through fixed integer
//! coefficients ([`CoefficientTable`]). If every admissible residue tuple of
//! base elements puts at least `e` window elements in class `x (mod m)`,
//! the lower density of that class is at least `e / (2^(j+1) - 2)`.

mod coefficients;
mod naive;
mod search;
mod tuples;
mod window;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

pub use coefficients::{
    build_coefficient_table, build_coefficient_table_with, row_count, CoefficientTable,
    ReducedCoefficients, MAX_J,
};
pub use naive::{naive_min_hits, NAIVE_WORK_CAP};
pub use search::{search_min_hits, search_min_hits_with, SearchOptions, MAX_SEARCH_J};
pub use tuples::{admissible_tuples, AdmissibleTupleSpec, Domain};
pub use window::{
    empirical_window_check, verify_window_disjoint, window_intervals, WindowInterval,
};

use crate::error::{Error, Result};
use crate::seqcore::Modulus;

/// `2^(j+1) - 2`.
pub fn denominator(j: u32) -> u64 {
    (1u64 << (j + 1)) - 2
}

/// A minimum hit count `e` for `(x, m, j)` with a tuple attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub x: u32,
    pub m: u32,
    pub j: u32,
    pub e: u32,
    pub denominator: u64,
    /// `"e/denominator"`, unreduced.
    pub density_lower_bound: String,
    pub witness_tuple: Vec<u32>,
    pub tuples_examined: u64,
    pub elapsed_seconds: f64,
    /// False for budget-truncated searches, whose `e` is only an upper bound.
    pub certified: bool,
}

impl Certificate {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        x: u32,
        m: u32,
        j: u32,
        e: u32,
        witness_tuple: Vec<u32>,
        tuples_examined: u64,
        elapsed_seconds: f64,
        certified: bool,
    ) -> Self {
        let denominator = denominator(j);
        Self {
            x,
            m,
            j,
            e,
            denominator,
            density_lower_bound: format!("{e}/{denominator}"),
            witness_tuple,
            tuples_examined,
            elapsed_seconds,
            certified,
        }
    }
}

/// `e / (2^(j+1) - 2)` as an exact fraction.
pub fn lower_density(e: u32, j: u32) -> Ratio<u64> {
    Ratio::new(e as u64, denominator(j))
}

pub fn density_bound(cert: &Certificate) -> Result<Ratio<u64>> {
    if !cert.certified {
        return Err(Error::Uncertified {
            x: cert.x,
            m: cert.m,
            j: cert.j,
        });
    }
    Ok(lower_density(cert.e, cert.j))
}

/// Counting bound `S(x, m, n) > (e/den) n - (3e / ln 2^j) ln n - e`.
pub fn bound_curve(cert: &Certificate, n: u64) -> f64 {
    let e = cert.e as f64;
    let n = n as f64;
    let log_2j = cert.j as f64 * std::f64::consts::LN_2;
    e / cert.denominator as f64 * n - 3.0 * e / log_2j * n.ln() - e
}

/// Result of re-checking a certificate's witness without searching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    pub ok: bool,
    pub recomputed_hits: Option<u32>,
    pub problems: Vec<String>,
}

/// Re-evaluates the witness tuple through a freshly built coefficient table
/// and checks the record's internal consistency. Minimality of `e` is not
/// re-established here.
pub fn verify_certificate(cert: &Certificate) -> Result<WitnessCheck> {
    let mut problems = Vec::new();
    let m = Modulus::new(cert.m)?;
    let spec = admissible_tuples(m, cert.j)?;
    if cert.x >= cert.m {
        problems.push(format!("x = {} is not a residue mod {}", cert.x, cert.m));
    }
    if cert.denominator != denominator(cert.j) {
        problems.push(format!(
            "denominator {} should be {}",
            cert.denominator,
            denominator(cert.j)
        ));
    }
    let expected_bound = format!("{}/{}", cert.e, denominator(cert.j));
    if cert.density_lower_bound != expected_bound {
        problems.push(format!(
            "density_lower_bound {} should be {expected_bound}",
            cert.density_lower_bound
        ));
    }
    if cert.e as u64 > row_count(cert.j) {
        problems.push(format!("e = {} exceeds the window size", cert.e));
    }
    if !spec.contains(&cert.witness_tuple) {
        problems.push(format!(
            "witness {:?} is not an admissible tuple",
            cert.witness_tuple
        ));
    }
    let mut recomputed_hits = None;
    if problems.is_empty() {
        let table = build_coefficient_table(cert.j)?.reduce(m);
        let hits = table.hits(&cert.witness_tuple, cert.x);
        if hits != cert.e {
            problems.push(format!(
                "witness yields {hits} hits, certificate claims {}",
                cert.e
            ));
        }
        recomputed_hits = Some(hits);
    }
    Ok(WitnessCheck {
        ok: problems.is_empty(),
        recomputed_hits,
        problems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_bounds() {
        assert_eq!(lower_density(4708, 13), Ratio::new(4708, 16382));
        assert!(lower_density(4708, 13) > Ratio::new(2873, 10_000));
        assert_eq!(lower_density(1, 7), Ratio::new(1, 254));
        assert!(lower_density(1, 7) > Ratio::new(39, 10_000));
        assert_eq!(lower_density(0, 5), Ratio::from_integer(0));
    }

    #[test]
    fn uncertified_is_refused() {
        let c = Certificate::new(0, 3, 2, 1, vec![1, 1], 9, 0.0, false);
        assert!(matches!(density_bound(&c), Err(Error::Uncertified { .. })));
    }

    #[test]
    fn bound_curve_is_negative_for_tiny_n() {
        let c = search_min_hits(0, Modulus::new(3).unwrap(), 4).unwrap();
        assert!(bound_curve(&c, 2) < 0.0);
    }

    #[test]
    fn json_shape() {
        let c = Certificate::new(0, 3, 2, 1, vec![1, 1], 9, 0.5, true);
        let text = serde_json::to_string(&c).unwrap();
        let keys = [
            "x",
            "m",
            "j",
            "e",
            "denominator",
            "density_lower_bound",
            "witness_tuple",
            "tuples_examined",
            "elapsed_seconds",
            "certified",
        ];
        let pos: Vec<usize> = keys
            .iter()
            .map(|k| text.find(&format!("\"{k}\":")).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_object().unwrap().len(), keys.len());
        assert_eq!(v["density_lower_bound"], "1/6");
    }

    #[test]
    fn witness_verification() {
        let c = search_min_hits(0, Modulus::new(5).unwrap(), 4).unwrap();
        let check = verify_certificate(&c).unwrap();
        assert!(check.ok, "{check:?}");
        assert_eq!(check.recomputed_hits, Some(c.e));

        let mut forged = c.clone();
        forged.e += 1;
        forged.density_lower_bound = format!("{}/{}", forged.e, forged.denominator);
        assert!(!verify_certificate(&forged).unwrap().ok);

        let mut bad_tuple = c;
        bad_tuple.witness_tuple.pop();
        assert!(!verify_certificate(&bad_tuple).unwrap().ok);
    }
}
