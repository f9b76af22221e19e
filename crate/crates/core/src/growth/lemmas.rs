//! Sampled checks of the elementary inequalities behind the growth bound.
//!
//! Each inequality is written as `lhs < rhs` and passes at a sample iff
//! `lhs < rhs + LEMMA_SLACK * max(|lhs|, |rhs|)`. Integer-indexed lemmas are
//! checked at every integer of their domain up to [`INTEGER_LIMIT`];
//! real-variable lemmas on log-spaced grids up to [`REAL_LIMIT`].

use rayon::prelude::*;

use super::GrowthParams;
use crate::error::{Error, Result};
use crate::verdict::{LemmaVerdict, Witness};

pub const LEMMA_SLACK: f64 = 1e-9;
pub const INTEGER_LIMIT: u64 = 100_000;
pub const REAL_LIMIT: f64 = 1e6;
pub const MIN_GRID_DENSITY: u32 = 10;

pub const LEMMA_IDS: [&str; 10] = [
    "fngrows",
    "logbylinear",
    "basiclog",
    "taylorlog",
    "taylore",
    "nastylog",
    "upperbounde",
    "anothernastylog",
    "basicloglog",
    "notherone",
];

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs < rhs + LEMMA_SLACK * lhs.abs().max(rhs.abs())
}

/// `per_decade` points per factor of 10 from `lo` (exclusive unless
/// `include_lo`) up to and including `hi`.
fn log_grid(lo: f64, hi: f64, per_decade: u32, include_lo: bool) -> Vec<f64> {
    let steps = ((hi / lo).log10() * per_decade as f64).ceil() as u32;
    let first = if include_lo { 0 } else { 1 };
    (first..=steps)
        .map(|k| {
            if k == steps {
                hi
            } else {
                lo * 10f64.powf(k as f64 / per_decade as f64)
            }
        })
        .collect()
}

fn integer_lemma(id: &str, lo: u64, check: impl Fn(f64) -> (f64, f64) + Sync) -> LemmaVerdict {
    let bad = (lo..=INTEGER_LIMIT).into_par_iter().find_first(|&n| {
        let (lhs, rhs) = check(n as f64);
        !holds(lhs, rhs)
    });
    LemmaVerdict::first_index(id, INTEGER_LIMIT, bad.map(|n| vec![n]))
}

fn real_lemma(id: &str, points: &[f64], check: impl Fn(f64) -> (f64, f64)) -> LemmaVerdict {
    let bad = points.iter().copied().find(|&x| {
        let (lhs, rhs) = check(x);
        !holds(lhs, rhs)
    });
    LemmaVerdict::new(id, REAL_LIMIT as u64, bad.map(|x| Witness::Point(vec![x])))
}

/// One verdict per entry of [`LEMMA_IDS`], in that order.
pub fn analytic_lemma_suite(grid_density: u32) -> Result<Vec<LemmaVerdict>> {
    if grid_density < MIN_GRID_DENSITY {
        return Err(Error::InvalidArgument(format!(
            "grid density must be at least {MIN_GRID_DENSITY} samples per decade, got {grid_density}"
        )));
    }
    let g = GrowthParams::default();
    let c1 = g.c1;
    let e = std::f64::consts::E;
    let ln2 = std::f64::consts::LN_2;
    let d = grid_density;

    // f increasing for x > 8, on consecutive grid points
    let grid = log_grid(8.0, REAL_LIMIT, d, false);
    let fngrows = {
        let bad = grid
            .windows(2)
            .find(|w| !holds(g.f(w[0]), g.f(w[1])))
            .map(|w| Witness::Point(vec![w[0], w[1]]));
        LemmaVerdict::new("fngrows", REAL_LIMIT as u64, bad)
    };

    let logbylinear = real_lemma("logbylinear", &log_grid(200.0, REAL_LIMIT, d, false), |x| {
        (2.0 * c1 * x.ln() / x, 0.05)
    });

    // ln x + a/(x+a) < ln(x+a) < ln x + a/x, with ln x cancelled
    let basiclog = {
        let xs = log_grid(1.0, REAL_LIMIT, d, false);
        let as_ = log_grid(1e-6, REAL_LIMIT, d, true);
        let bad = xs.iter().find_map(|&x| {
            as_.iter().find_map(|&a| {
                let u = a / x;
                let mid = u.ln_1p();
                let ok = holds(a / (x + a), mid) && holds(mid, u);
                (!ok).then(|| Witness::Point(vec![x, a]))
            })
        });
        LemmaVerdict::new("basiclog", REAL_LIMIT as u64, bad)
    };

    let taylorlog = real_lemma("taylorlog", &log_grid(1.0, REAL_LIMIT, d, false), |x| {
        (1.0 / x - 1.0 / (2.0 * x * x), (1.0 / x).ln_1p())
    });

    let taylore = real_lemma("taylore", &log_grid(0.5, REAL_LIMIT, d, true), |x| {
        (1.0 - 1.0 / (2.0 * x), (-1.0 / (2.0 * x)).exp())
    });

    // with u = log2(n/2): (1 + 1/u)^u
    let nastylog = integer_lemma("nastylog", 4, |n| {
        let u = (n / 2.0).ln() / ln2;
        (e - 1.0 / n.ln(), (u * (1.0 / u).ln_1p()).exp())
    });

    let upperbounde = integer_lemma("upperbounde", 1, |n| {
        (e, ((n + 1.0) * (1.0 / n).ln_1p()).exp())
    });

    let anothernastylog = integer_lemma("anothernastylog", 2, |n| {
        let h = ((n + 1.0) / 2.0).ln();
        (2.0 * c1 * n.ln().ln() - 1.0 / h, 2.0 * c1 * h.ln())
    });

    let basicloglog = integer_lemma("basicloglog", 2, |n| {
        let lhs = ((1.0 / n).ln_1p() / n.ln()).ln_1p();
        (lhs, 1.0 / (n * n.ln()))
    });

    let notherone = integer_lemma("notherone", 4, |n| {
        (2.0 * c1 * (n + 2.0) * (n + 1.0).ln() / (n * n.ln()), 3.0)
    });

    Ok(vec![
        fngrows,
        logbylinear,
        basiclog,
        taylorlog,
        taylore,
        nastylog,
        upperbounde,
        anothernastylog,
        basicloglog,
        notherone,
    ])
}
