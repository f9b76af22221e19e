//! Growth of `a(n)` against `n^f(n)`, `f(n) = c1 ln n - 2 c1 ln ln n + c2`.
//!
//! `ln a(n)` is taken from the exact integer: bit length plus the leading 64
//! bits, evaluated in `f64`. The comparison with `f(n) ln n` carries an
//! explicit error bound; a margin inside the bound is re-decided with
//! multi-precision arithmetic at doubling widths.

mod lemmas;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

pub use lemmas::{analytic_lemma_suite, LEMMA_IDS, LEMMA_SLACK};

use crate::error::{Error, Result};
use crate::seqcore::{exact_prefix, ExactPrefix};

/// Relative error bound of the `f64` path, covering both `ln a(n)` and the
/// threshold.
pub const FAST_RELATIVE_ERROR: f64 = 1.0 / (1u64 << 40) as f64;
/// First multi-precision width tried after the `f64` path is inconclusive.
pub const ESCALATION_START_BITS: usize = 128;
/// Widest mantissa tried before giving up.
pub const ESCALATION_MAX_BITS: usize = 4096;
/// Guard bits subtracted from the working width when bounding its error.
const ESCALATION_GUARD_BITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthParams {
    pub c1: f64,
    pub c2: f64,
}

impl Default for GrowthParams {
    fn default() -> Self {
        let ln2 = std::f64::consts::LN_2;
        Self {
            c1: 1.0 / (2.0 * ln2),
            c2: 0.5 + (1.0 + ln2.ln()) / ln2,
        }
    }
}

impl GrowthParams {
    /// `f(x)`; defined for `x > 1`.
    pub fn f(&self, x: f64) -> f64 {
        let l = x.ln();
        self.c1 * l - 2.0 * self.c1 * l.ln() + self.c2
    }

    /// `f(n) ln n`, the logarithm of `n^f(n)`.
    pub fn threshold(&self, n: f64) -> f64 {
        self.f(n) * n.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    fn classify(margin: f64, error_bound: f64) -> Self {
        if margin.abs() <= error_bound {
            Verdict::Indeterminate
        } else if margin > 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRecord {
    pub n: u64,
    pub log_a_n: f64,
    pub threshold: f64,
    pub margin: f64,
    /// Bound on the absolute error of `margin`.
    pub error_bound: f64,
    /// Mantissa width that decided the record; 53 for the `f64` path.
    pub precision_bits: usize,
    pub verdict: Verdict,
}

pub const GROWTH_CSV_HEADER: &str = "n,log_a_n,threshold,margin,verdict";

pub fn write_growth_csv<W: std::io::Write>(
    records: &[GrowthRecord],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "{GROWTH_CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            r.log_a_n,
            r.threshold,
            r.margin,
            r.verdict.as_str()
        )?;
    }
    Ok(())
}

/// `ln v` from the bit length and the leading 64 bits of `v`.
pub fn log_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    assert!(bits > 0, "logarithm of zero");
    if bits <= 64 {
        let top = v.iter_u64_digits().next().unwrap_or(0);
        return (top as f64).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift)
        .iter_u64_digits()
        .next()
        .expect("64 leading bits");
    shift as f64 * std::f64::consts::LN_2 + (top as f64).ln()
}

fn fast_record(params: &GrowthParams, n: u64, a: &BigUint) -> GrowthRecord {
    let log_a_n = log_biguint(a);
    let threshold = params.threshold(n as f64);
    let margin = log_a_n - threshold;
    let error_bound = FAST_RELATIVE_ERROR * (log_a_n.abs() + threshold.abs());
    GrowthRecord {
        n,
        log_a_n,
        threshold,
        margin,
        error_bound,
        precision_bits: 53,
        verdict: Verdict::classify(margin, error_bound),
    }
}

fn to_f64(v: &BigFloat, cc: &mut Consts) -> f64 {
    v.format(Radix::Dec, RoundingMode::ToEven, cc)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(f64::NAN)
}

/// The same comparison at a `p`-bit mantissa, with `c1`, `c2` rebuilt at
/// that width from `ln 2`.
fn precise_record(n: u64, a: &BigUint, p: usize, cc: &mut Consts) -> GrowthRecord {
    let rm = RoundingMode::ToEven;
    let ln2 = cc.ln_2(p, rm);
    let one = BigFloat::from_u8(1, p);
    let half = BigFloat::from_f64(0.5, p);
    let c1 = one.div(&ln2.mul(&BigFloat::from_u8(2, p), p, rm), p, rm);
    let c2 = half.add(&one.add(&ln2.ln(p, rm, cc), p, rm).div(&ln2, p, rm), p, rm);
    let ln_n = BigFloat::from_u64(n, p).ln(p, rm, cc);
    let f = c1
        .mul(&ln_n, p, rm)
        .sub(
            &BigFloat::from_u8(2, p)
                .mul(&c1, p, rm)
                .mul(&ln_n.ln(p, rm, cc), p, rm),
            p,
            rm,
        )
        .add(&c2, p, rm);
    let threshold = f.mul(&ln_n, p, rm);
    let a_f = BigFloat::parse(&a.to_str_radix(10), Radix::Dec, p, rm, cc);
    let log_a = a_f.ln(p, rm, cc);
    let margin = log_a.sub(&threshold, p, rm);

    let log_a_n = to_f64(&log_a, cc);
    let threshold = to_f64(&threshold, cc);
    let margin_f = to_f64(&margin, cc);
    let eps = 2f64.powi(-((p - ESCALATION_GUARD_BITS) as i32));
    let error_bound = eps * (log_a_n.abs() + threshold.abs() + 1.0);
    // the sign decision uses the multi-precision margin, not its f64 image
    let verdict = if margin.is_nan() || margin_f.abs() <= error_bound {
        Verdict::Indeterminate
    } else if margin.is_positive() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    GrowthRecord {
        n,
        log_a_n,
        threshold,
        margin: margin_f,
        error_bound,
        precision_bits: p,
        verdict,
    }
}

/// Decides one index, escalating precision while the margin is inside the
/// error bound.
pub fn growth_record(params: &GrowthParams, n: u64, a: &BigUint) -> Result<GrowthRecord> {
    let record = fast_record(params, n, a);
    if record.verdict != Verdict::Indeterminate {
        return Ok(record);
    }
    let mut cc = Consts::new().map_err(|e| Error::InvalidArgument(format!("{e:?}")))?;
    let mut p = ESCALATION_START_BITS;
    while p <= ESCALATION_MAX_BITS {
        let record = precise_record(n, a, p, &mut cc);
        if record.verdict != Verdict::Indeterminate {
            return Ok(record);
        }
        p *= 2;
    }
    Err(Error::PrecisionExhausted { n })
}

fn check_range(from: u64, to: u64) -> Result<()> {
    if from < 2 || from > to {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= from <= to, got [{from}, {to}]"
        )));
    }
    Ok(())
}

/// `a(n) > n^f(n)` for each `n` in `[from, to]`, in index order.
pub fn growth_lower_check(from: u64, to: u64) -> Result<Vec<GrowthRecord>> {
    check_range(from, to)?;
    growth_lower_check_on(&exact_prefix(to)?, from, to)
}

pub fn growth_lower_check_on(
    prefix: &ExactPrefix,
    from: u64,
    to: u64,
) -> Result<Vec<GrowthRecord>> {
    check_range(from, to)?;
    if to > prefix.limit() {
        return Err(Error::OutOfRange {
            needed: to,
            limit: prefix.limit(),
        });
    }
    let params = GrowthParams::default();
    (from..=to)
        .into_par_iter()
        .map(|n| growth_record(&params, n, prefix.get(n)))
        .collect()
}

/// Indices in a record set whose verdict is `fail`.
pub fn failing_indices(records: &[GrowthRecord]) -> Vec<u64> {
    records
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .map(|r| r.n)
        .collect()
}

/// Empirical look at `a(n) < C n^(f(n) + eps)`: the largest observed
/// `ln a(n) - (f(n) + eps) ln n`, i.e. `ln C` needed up to `limit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundProbe {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub limit: u64,
    /// Log-domain maximum over `2 <= n <= limit`.
    pub c_observed: f64,
    pub argmax: u64,
    /// True when the maximum is attained at `n <= limit / 10`, i.e. it did
    /// not grow over the last decade of indices.
    pub stopped_growing: bool,
}

pub fn upper_probe(epsilon: f64, limit: u64) -> Result<UpperBoundProbe> {
    if limit < 2 {
        return Err(Error::InvalidArgument(format!(
            "limit must be at least 2, got {limit}"
        )));
    }
    upper_probe_on(&exact_prefix(limit)?, epsilon, limit)
}

pub fn upper_probe_on(prefix: &ExactPrefix, epsilon: f64, limit: u64) -> Result<UpperBoundProbe> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if limit < 2 || limit > prefix.limit() {
        return Err(Error::InvalidArgument(format!(
            "limit must be in [2, {}], got {limit}",
            prefix.limit()
        )));
    }
    let params = GrowthParams::default();
    let (c_observed, argmax) = (2..=limit)
        .into_par_iter()
        .map(|n| {
            let x = n as f64;
            let v = log_biguint(prefix.get(n)) - (params.f(x) + epsilon) * x.ln();
            (v, n)
        })
        // ties resolve to the smallest n
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(UpperBoundProbe {
        epsilon,
        limit,
        c_observed,
        argmax,
        stopped_growing: argmax <= limit / 10,
    })
}
