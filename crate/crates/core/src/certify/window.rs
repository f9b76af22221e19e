use rayon::prelude::*;

use super::tuples::admissible_tuples;
use super::Certificate;
use crate::error::{Error, Result};
use crate::seqcore::{Modulus, ResidueTable};
use crate::verdict::LemmaVerdict;

/// Index run `[2^i k + 1, 2^i k + 2^i - 1]` of one window piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowInterval {
    pub i: u32,
    pub k: u64,
    pub w: u32,
    pub start: u64,
    pub end: u64,
}

/// All runs used by the counting bound for `n`: `1 <= w <= floor(log n /
/// log 2^j)`, `ceil(n / 2^(jw+1)) <= k <= floor(n / 2^(jw)) - 1`,
/// `1 <= i <= j`.
pub fn window_intervals(n: u64, j: u32) -> Vec<WindowInterval> {
    let mut out = Vec::new();
    let mut w = 1u32;
    loop {
        let shift = j as u64 * w as u64;
        if shift >= 64 || (1u64 << shift) > n {
            break;
        }
        let k_lo = n.div_ceil(1u64 << (shift + 1).min(63)).max(1);
        let k_hi = (n >> shift).saturating_sub(1);
        for k in k_lo..=k_hi {
            for i in 1..=j {
                let base = k << i;
                out.push(WindowInterval {
                    i,
                    k,
                    w,
                    start: base + 1,
                    end: base + (1u64 << i) - 1,
                });
            }
        }
        w += 1;
    }
    out
}

/// All window runs lie in `[3, n]` and no two overlap. Counterexamples are
/// `[i, k, w]` for a run out of range, or `[i, k, w, i', k', w']` for an
/// overlapping pair.
pub fn verify_window_disjoint(n: u64, j: u32) -> Result<LemmaVerdict> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "n must be at least 8, got {n}"
        )));
    }
    if j == 0 || j > 62 {
        return Err(Error::InvalidArgument(format!(
            "j must be in 1..=62, got {j}"
        )));
    }
    let id = format!("window-disjoint-j{j}");
    let mut runs = window_intervals(n, j);
    if let Some(r) = runs.iter().find(|r| r.start < 3 || r.end > n) {
        return Ok(LemmaVerdict::first_index(
            id,
            n,
            Some(vec![r.i as u64, r.k, r.w as u64]),
        ));
    }
    runs.sort_by_key(|r| (r.start, r.end));
    let clash = runs.windows(2).find(|p| p[1].start <= p[0].end).map(|p| {
        vec![
            p[0].i as u64,
            p[0].k,
            p[0].w as u64,
            p[1].i as u64,
            p[1].k,
            p[1].w as u64,
        ]
    });
    Ok(LemmaVerdict::first_index(id, n, clash))
}

/// Checks a certificate against the actual sequence: for every `k >= 1`
/// whose whole window fits in the table, the realised base residues must be
/// admissible and the window must contain at least `e` elements congruent
/// to `x`. The counterexample is `[k]`.
pub fn empirical_window_check(cert: &Certificate, table: &ResidueTable) -> Result<LemmaVerdict> {
    if table.modulus().get() != cert.m {
        return Err(Error::InvalidArgument(format!(
            "table is mod {}, certificate is mod {}",
            table.modulus(),
            cert.m
        )));
    }
    let spec = admissible_tuples(Modulus::new(cert.m)?, cert.j)?;
    let j = cert.j;
    let span = 1u64 << j;
    let n = table.limit();
    // window for k ends at 2^j k + 2^j - 1
    let k_max = (n + 1) / span - 1;
    let id = format!("empirical-window-x{}-m{}-j{}", cert.x, cert.m, j);
    let bad = (1..=k_max).into_par_iter().find_first(|&k| {
        let base: Vec<u32> = (1..=j).map(|i| table.get((k << i) + 1)).collect();
        if !spec.contains(&base) {
            return true;
        }
        let mut hits = 0u32;
        for i in 1..=j {
            let start = k << i;
            for t in 1..(1u64 << i) {
                hits += (table.get(start + t) == cert.x) as u32;
            }
        }
        hits < cert.e
    });
    Ok(LemmaVerdict::first_index(id, n, bad.map(|k| vec![k])))
}
