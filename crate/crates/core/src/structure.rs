//! Finite-range checks of the 2-adic congruence structure of `a(n)`.
//!
//! Every verifier reads a shared [`ResidueTable`] whose modulus is a multiple
//! of the level it checks (a mod 32 table serves all of them), splits its
//! index range across threads and reports the smallest counterexample.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seqcore::{two_adic_valuation, Modulus, ResidueTable};
use crate::verdict::LemmaVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Mod8,
    Mod16,
    Mod32,
}

impl Level {
    pub fn modulus(self) -> u32 {
        match self {
            Level::Mod8 => 8,
            Level::Mod16 => 16,
            Level::Mod32 => 32,
        }
    }
}

impl TryFrom<u32> for Level {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            8 => Ok(Level::Mod8),
            16 => Ok(Level::Mod16),
            32 => Ok(Level::Mod32),
            _ => Err(Error::InvalidArgument(format!(
                "quadrupling level must be 8, 16 or 32, got {v}"
            ))),
        }
    }
}

fn require_modulus(table: &ResidueTable, divisor: u32) -> Result<()> {
    if !table.modulus().get().is_multiple_of(divisor) {
        return Err(Error::InvalidArgument(format!(
            "table modulus {} is not a multiple of {divisor}",
            table.modulus()
        )));
    }
    Ok(())
}

fn first_failure<F>(lo: u64, hi: u64, bad: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync,
{
    if lo > hi {
        return None;
    }
    (lo..=hi).into_par_iter().find_first(|&k| bad(k))
}

/// `a(n) ≡ v2(n) + 1 (mod 2)` for `1 <= n <= N`.
pub fn verify_parity_lemma(table: &ResidueTable, n: u64) -> Result<LemmaVerdict> {
    require_modulus(table, 2)?;
    table.require(n)?;
    let bad = first_failure(1, n, |k| {
        table.get(k) % 2 != (two_adic_valuation(k) + 1) % 2
    });
    Ok(LemmaVerdict::first_index("parity", n, bad.map(|k| vec![k])))
}

/// `a(4n)` against `a(n)` for `1 <= n <= N`.
///
/// | level | odd n                  | even n                  |
/// |-------|------------------------|-------------------------|
/// | 8     | `a(4n) ≡ a(n) + 4`     | `a(4n) ≡ a(n)`          |
/// | 16    | `a(4n) ≡ 5 a(n)`       | `a(4n) ≡ a(n)`          |
/// | 32    | `a(4n) ≡ 5 a(n)`       | `a(4n) ≡ a(n) + 8n`     |
pub fn verify_quadrupling(table: &ResidueTable, n: u64, level: Level) -> Result<LemmaVerdict> {
    let q = level.modulus();
    require_modulus(table, q)?;
    table.require(n.saturating_mul(4))?;
    let q64 = q as u64;
    let bad = first_failure(1, n, |k| {
        let an = table.get(k) as u64 % q64;
        let a4n = table.get(4 * k) as u64 % q64;
        let expected = match (level, k % 2 == 1) {
            (Level::Mod8, true) => an + 4,
            (Level::Mod8, false) | (Level::Mod16, false) => an,
            (Level::Mod16, true) | (Level::Mod32, true) => 5 * an,
            (Level::Mod32, false) => an + 8 * (k % 4),
        } % q64;
        a4n != expected
    });
    Ok(LemmaVerdict::first_index(
        format!("quadrupling-mod{q}"),
        n,
        bad.map(|k| vec![k, 4 * k]),
    ))
}

/// The two orderings `(a(8k+1), a(8k+3), a(8k+5), a(8k+7)) mod 8` can take.
pub const ODD_QUADRUPLE_PATTERNS: [[u32; 4]; 2] = [[1, 3, 7, 5], [7, 5, 1, 3]];

/// For `0 <= k <= N`, `{a(8k+1), a(8k+3), a(8k+5), a(8k+7)} mod 8` is
/// `{1, 3, 5, 7}`. The strong form also requires the ordered tuple to be
/// `(t, 3t, 7t, 5t)` with `t = a(8k+1)` and one of [`ODD_QUADRUPLE_PATTERNS`].
pub fn verify_odd_quadruples(table: &ResidueTable, n: u64, strong: bool) -> Result<LemmaVerdict> {
    require_modulus(table, 8)?;
    table.require(n.saturating_mul(8).saturating_add(7))?;
    let bad = first_failure(0, n, |k| {
        let quad = [1, 3, 5, 7].map(|o| table.get(8 * k + o) % 8);
        !odd_quadruple_ok(quad, strong)
    });
    let id = if strong {
        "odd-quadruples-strong"
    } else {
        "odd-quadruples"
    };
    Ok(LemmaVerdict::first_index(
        id,
        n,
        bad.map(|k| [1, 3, 5, 7].map(|o| 8 * k + o).to_vec()),
    ))
}

fn odd_quadruple_ok(quad: [u32; 4], strong: bool) -> bool {
    let mut sorted = quad;
    sorted.sort_unstable();
    if sorted != [1, 3, 5, 7] {
        return false;
    }
    if !strong {
        return true;
    }
    let t = quad[0];
    let scaled = [1, 3, 7, 5].map(|c| c * t % 8);
    scaled == quad && ODD_QUADRUPLE_PATTERNS.contains(&quad)
}

/// For `0 <= k <= N`: `a(16k+2) ≡ a(16k+6) ≡ -a(16k+10) ≡ -a(16k+14) ≡ ±2
/// (mod 8)`, so the four values hit 2 and 6 twice each.
pub fn verify_even_quadruples(table: &ResidueTable, n: u64) -> Result<LemmaVerdict> {
    require_modulus(table, 8)?;
    table.require(n.saturating_mul(16).saturating_add(14))?;
    let bad = first_failure(0, n, |k| {
        let quad = [2, 6, 10, 14].map(|o| table.get(16 * k + o) % 8);
        !even_quadruple_ok(quad)
    });
    Ok(LemmaVerdict::first_index(
        "even-quadruples",
        n,
        bad.map(|k| [2, 6, 10, 14].map(|o| 16 * k + o).to_vec()),
    ))
}

fn even_quadruple_ok(q: [u32; 4]) -> bool {
    let neg = |v: u32| (8 - v) % 8;
    let chain = q[0] == q[1] && q[1] == neg(q[2]) && q[2] == q[3] && (q[0] == 2 || q[0] == 6);
    let mut sorted = q;
    sorted.sort_unstable();
    chain && sorted == [2, 2, 6, 6]
}

/// Scaled versions of both quadruple lemmas: for `0 <= k <= N` and
/// `0 <= p <= max_power`, `{a(4^p (8k + o)) : o = 1,3,5,7}` hits each odd
/// class mod 8 once and `{a(4^p (16k + o)) : o = 2,6,10,14}` hits 2 and 6
/// twice each. Counterexamples are reported as `[k, p]`.
pub fn verify_scaled_sets(table: &ResidueTable, n: u64, max_power: u32) -> Result<LemmaVerdict> {
    require_modulus(table, 8)?;
    let scale = 4u64
        .checked_pow(max_power)
        .ok_or_else(|| Error::InvalidArgument(format!("4^{max_power} overflows")))?;
    table.require(scale.saturating_mul(n.saturating_mul(16).saturating_add(14)))?;
    let bad = first_failure(0, n, |k| {
        (0..=max_power).any(|p| !scaled_block_ok(table, k, p))
    });
    let first = bad.map(|k| {
        let p = (0..=max_power)
            .find(|&p| !scaled_block_ok(table, k, p))
            .expect("failing k has a failing power");
        vec![k, p as u64]
    });
    Ok(LemmaVerdict::first_index(
        format!("scaled-sets-p{max_power}"),
        n,
        first,
    ))
}

fn scaled_block_ok(table: &ResidueTable, k: u64, p: u32) -> bool {
    let s = 4u64.pow(p);
    let mut odd = [1, 3, 5, 7].map(|o| table.get(s * (8 * k + o)) % 8);
    let mut even = [2, 6, 10, 14].map(|o| table.get(s * (16 * k + o)) % 8);
    odd.sort_unstable();
    even.sort_unstable();
    odd == [1, 3, 5, 7] && even == [2, 2, 6, 6]
}

/// Runs every structure verifier on a mod 32 table, each over the largest
/// range whose indices stay within `limit`.
pub fn run_suite(limit: u64) -> Result<Vec<LemmaVerdict>> {
    let table = crate::seqcore::residue_stream(Modulus::new(32)?, limit)?;
    run_suite_on(&table)
}

pub fn run_suite_on(table: &ResidueTable) -> Result<Vec<LemmaVerdict>> {
    require_modulus(table, 32)?;
    let limit = table.limit();
    let mut out = vec![verify_parity_lemma(table, limit)?];

    let quad_n = limit / 4;
    let levels = [Level::Mod8, Level::Mod16, Level::Mod32];
    let quad: Vec<LemmaVerdict> = levels
        .iter()
        .map(|&l| verify_quadrupling(table, quad_n, l))
        .collect::<Result<_>>()?;
    // mod 32 implies mod 16 implies mod 8 on the same range
    if quad[2].is_pass() {
        assert!(
            quad[1].is_pass(),
            "mod-32 quadrupling passed but mod-16 failed"
        );
    }
    if quad[1].is_pass() {
        assert!(
            quad[0].is_pass(),
            "mod-16 quadrupling passed but mod-8 failed"
        );
    }
    out.extend(quad);

    if limit >= 7 {
        let k = (limit - 7) / 8;
        out.push(verify_odd_quadruples(table, k, false)?);
        out.push(verify_odd_quadruples(table, k, true)?);
    }
    if limit >= 14 {
        out.push(verify_even_quadruples(table, (limit - 14) / 16)?);
    }
    let mut p = 0u32;
    while let Some(scale) = 4u64.checked_pow(p) {
        let top = limit / scale;
        if top < 14 {
            break;
        }
        out.push(verify_scaled_sets(table, (top - 14) / 16, p)?);
        p += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::residue_stream;

    fn t32(n: u64) -> ResidueTable {
        residue_stream(Modulus::new(32).unwrap(), n).unwrap()
    }

    #[test]
    fn parity_small() {
        let t = t32(10);
        assert!(verify_parity_lemma(&t, 10).unwrap().is_pass());
        assert!(verify_parity_lemma(&t, 1).unwrap().is_pass());
        // n = 8: v2 = 3 and a(8) = 18 is even
        assert_eq!(t.get(8) % 2, 0);
    }

    #[test]
    fn quadrupling_examples() {
        let t = t32(64);
        // a(4) = 5 = a(1) + 4; a(8) = 18 = a(2) + 16; a(12) = 47 ≡ 5 * 3 (mod 32)
        assert_eq!(t.get(4), 5);
        assert_eq!(t.get(8), 18);
        assert_eq!(t.get(12), 15);
        for l in [Level::Mod8, Level::Mod16, Level::Mod32] {
            assert!(verify_quadrupling(&t, 16, l).unwrap().is_pass());
        }
    }

    #[test]
    fn odd_quadruple_first_block() {
        let t = t32(16);
        let quad: Vec<u32> = [1, 3, 5, 7].iter().map(|&i| t.get(i) % 8).collect();
        assert_eq!(quad, vec![1, 3, 7, 5]);
        assert!(verify_odd_quadruples(&t, 0, true).unwrap().is_pass());
    }

    #[test]
    fn even_quadruple_first_block() {
        let t = t32(16);
        let quad: Vec<u32> = [2, 6, 10, 14].iter().map(|&i| t.get(i) % 8).collect();
        // a = 2, 10, 30, 70
        assert_eq!(quad, vec![2, 2, 6, 6]);
        assert!(verify_even_quadruples(&t, 0).unwrap().is_pass());
    }

    #[test]
    fn scaled_set_first_block() {
        let t = t32(4 * 14);
        // a(4), a(12), a(20), a(28) = 5, 47, 195, 577
        let got: Vec<u32> = [4, 12, 20, 28].iter().map(|&i| t.get(i) % 8).collect();
        assert_eq!(got, vec![5, 7, 3, 1]);
        assert!(verify_scaled_sets(&t, 0, 1).unwrap().is_pass());
        assert_eq!(
            verify_scaled_sets(&t, 0, 0).unwrap().status,
            verify_odd_quadruples(&t, 0, false).unwrap().status
        );
    }

    #[test]
    fn moderate_ranges_pass() {
        let t = t32(200_000);
        assert!(verify_odd_quadruples(&t, 20_000, false).unwrap().is_pass());
        assert!(verify_odd_quadruples(&t, 20_000, true).unwrap().is_pass());
        assert!(verify_even_quadruples(&t, 10_000).unwrap().is_pass());
        assert!(verify_scaled_sets(&t, 100, 3).unwrap().is_pass());
    }

    #[test]
    fn range_and_modulus_errors() {
        let t = t32(100);
        assert!(matches!(
            verify_quadrupling(&t, 26, Level::Mod8),
            Err(Error::OutOfRange { needed: 104, .. })
        ));
        let t3 = residue_stream(Modulus::new(3).unwrap(), 100).unwrap();
        assert!(verify_parity_lemma(&t3, 10).is_err());
        assert!(Level::try_from(12).is_err());
    }

    #[test]
    fn quadruple_predicates_reject_bad_shapes() {
        assert!(!odd_quadruple_ok([1, 3, 5, 5], false));
        assert!(odd_quadruple_ok([3, 1, 5, 7], false));
        assert!(!odd_quadruple_ok([3, 1, 5, 7], true));
        assert!(odd_quadruple_ok([7, 5, 1, 3], true));
        assert!(!even_quadruple_ok([2, 6, 6, 2]));
        assert!(even_quadruple_ok([6, 6, 2, 2]));
    }

    #[test]
    fn suite_passes() {
        let verdicts = run_suite(100_000).unwrap();
        assert!(verdicts.len() >= 10);
        assert!(verdicts.iter().all(LemmaVerdict::is_pass), "{verdicts:?}");
    }
}
