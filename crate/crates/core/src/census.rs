//! Residue-class censuses `S(x, m, N) = #{k <= N : a(k) ≡ x (mod m)}` and
//! the conjectured limiting densities they are compared against.

use std::io::Write;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seqcore::{residue_stream_with, Budget, Modulus, ResidueTable};
use crate::verdict::{LemmaVerdict, Witness};

pub const CSV_HEADER: &str = "m,x,count,N,empirical,predicted,deviation";

/// Default pass threshold for `deviation_scan` at `N = 10^6`.
pub const DEFAULT_SCAN_THRESHOLD: f64 = 0.01;

fn ratio_as_string<S: Serializer>(r: &[Option<Ratio<u64>>], s: S) -> Result<S::Ok, S::Error> {
    let strings: Vec<Option<String>> = r.iter().map(|o| o.map(|r| r.to_string())).collect();
    strings.serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub modulus: Modulus,
    #[serde(rename = "N")]
    pub limit: u64,
    /// `counts[x] = S(x, m, N)`.
    pub counts: Vec<u64>,
    pub empirical_density: Vec<f64>,
    /// Conjectured density per class; `None` when `32 | m`.
    #[serde(serialize_with = "ratio_as_string")]
    pub predicted: Vec<Option<Ratio<u64>>>,
    pub deviation: Vec<Option<f64>>,
    /// `deviation / predicted`, absent where the prediction is 0 or missing.
    pub relative_deviation: Vec<Option<f64>>,
}

impl CensusReport {
    pub fn from_counts(modulus: Modulus, limit: u64, counts: Vec<u64>) -> Self {
        let m = modulus.get();
        let n = limit as f64;
        let empirical_density: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let predicted: Vec<Option<Ratio<u64>>> =
            (0..m).map(|x| predicted_density(x, modulus).ok()).collect();
        let deviation: Vec<Option<f64>> = empirical_density
            .iter()
            .zip(&predicted)
            .map(|(&e, p)| p.map(|p| e - ratio_to_f64(p)))
            .collect();
        let relative_deviation = deviation
            .iter()
            .zip(&predicted)
            .map(|(d, p)| match (d, p) {
                (Some(d), Some(p)) if *p.numer() != 0 => Some(d / ratio_to_f64(*p)),
                _ => None,
            })
            .collect();
        Self {
            modulus,
            limit,
            counts,
            empirical_density,
            predicted,
            deviation,
            relative_deviation,
        }
    }

    pub fn from_table(table: &ResidueTable) -> Self {
        let mut counts = vec![0u64; table.modulus().get() as usize];
        match table.narrow_slice() {
            Some(bytes) => bytes.iter().for_each(|&r| counts[r as usize] += 1),
            None => table.iter().for_each(|r| counts[r as usize] += 1),
        }
        Self::from_counts(table.modulus(), table.limit(), counts)
    }

    /// Largest `|empirical - predicted|` over classes with a prediction.
    pub fn worst_abs_deviation(&self) -> f64 {
        self.deviation
            .iter()
            .flatten()
            .fold(0.0f64, |acc, d| acc.max(d.abs()))
    }

    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (x, &count) in self.counts.iter().enumerate() {
            let predicted = self.predicted[x]
                .map(|p| ratio_to_f64(p).to_string())
                .unwrap_or_default();
            let deviation = self.deviation[x].map(|d| d.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.modulus, x, count, self.limit, self.empirical_density[x], predicted, deviation
            )?;
        }
        Ok(())
    }
}

pub fn write_csv<W: Write>(reports: &[CensusReport], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        r.write_csv_rows(out)?;
    }
    Ok(())
}

pub(crate) fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn run_census(m: Modulus, n: u64) -> Result<CensusReport> {
    run_census_with(m, n, &Budget::from_env())
}

pub fn run_census_with(m: Modulus, n: u64, budget: &Budget) -> Result<CensusReport> {
    let table = residue_stream_with(m, n, budget)?;
    Ok(CensusReport::from_table(&table))
}

/// Conjectured limiting density of `a(k) ≡ x (mod m)`.
///
/// Undefined (error) when `32 | m`.
pub fn predicted_density(x: u32, m: Modulus) -> Result<Ratio<u64>> {
    let mv = m.get() as u64;
    if x as u64 >= mv {
        return Err(Error::InvalidArgument(format!(
            "residue {x} is not in [0, {mv})"
        )));
    }
    if mv.is_multiple_of(32) {
        return Err(Error::UnsupportedModulus {
            m: mv,
            reason: "no density is conjectured when 32 divides m",
        });
    }
    let x = x as u64;
    let d = if mv % 2 == 1 {
        Ratio::new(1, mv)
    } else if mv % 4 == 2 {
        if x.is_multiple_of(2) {
            Ratio::new(2, 3 * mv)
        } else {
            Ratio::new(4, 3 * mv)
        }
    } else if x.is_multiple_of(4) {
        Ratio::from_integer(0)
    } else {
        Ratio::new(4, 3 * mv)
    };
    Ok(d)
}

/// Counts residues without keeping the second half of the table: index `k`
/// only ever reads `k - 1` and `floor(k/2)`.
fn streaming_counts(m: Modulus, n: u64, budget: &Budget) -> Result<Vec<u64>> {
    let half = n / 2 + 1;
    budget.check_bytes("census buffer", half.saturating_mul(2))?;
    let mv = m.get();
    let mut counts = vec![0u64; mv as usize];
    let mut prefix: Vec<u16> = Vec::with_capacity(half as usize);
    let mut prev = 1 % mv;
    prefix.push(prev as u16);
    counts[prev as usize] += 1;
    for k in 2..=n {
        let s = prev + prefix[(k / 2 - 1) as usize] as u32;
        prev = if s >= mv { s - mv } else { s };
        counts[prev as usize] += 1;
        if k <= half {
            prefix.push(prev as u16);
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    #[serde(rename = "N")]
    pub limit: u64,
    pub max_m: u32,
    /// Moduli skipped because `32 | m`.
    pub skipped: Vec<u32>,
    /// Sorted by descending worst absolute deviation.
    pub reports: Vec<CensusReport>,
}

impl ScanReport {
    pub fn worst_abs_deviation(&self) -> f64 {
        self.reports
            .iter()
            .map(CensusReport::worst_abs_deviation)
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, threshold: f64) -> bool {
        self.worst_abs_deviation() < threshold
    }
}

/// Census for every `2 <= m <= max_m` with `32 ∤ m`.
pub fn deviation_scan(max_m: u32, n: u64) -> Result<ScanReport> {
    deviation_scan_with(max_m, n, &Budget::from_env())
}

pub fn deviation_scan_with(max_m: u32, n: u64, budget: &Budget) -> Result<ScanReport> {
    if max_m < 2 {
        return Err(Error::InvalidArgument("max_m must be at least 2".into()));
    }
    if max_m > crate::seqcore::MAX_TABLE_MODULUS {
        return Err(Error::ModulusTooLarge(max_m as u64));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("census limit must be >= 1".into()));
    }
    let (skipped, moduli): (Vec<u32>, Vec<u32>) = (2..=max_m).partition(|m| m % 32 == 0);
    let mut reports = moduli
        .par_iter()
        .map(|&m| {
            let m = Modulus::new(m)?;
            let counts = streaming_counts(m, n, budget)?;
            Ok(CensusReport::from_counts(m, n, counts))
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| {
        b.worst_abs_deviation()
            .total_cmp(&a.worst_abs_deviation())
            .then(a.modulus.cmp(&b.modulus))
    });
    Ok(ScanReport {
        limit: n,
        max_m,
        skipped,
        reports,
    })
}

/// Residues covered by the mod 8 counting bound.
pub const MOD8_CLASSES: [u32; 6] = [1, 2, 3, 5, 6, 7];

/// Checks `S(x, 8, n) > n/6 - 2 ln n - 11` for every `n <= N` and every `x`
/// in [`MOD8_CLASSES`]; the counterexample is `[n, x]`.
pub fn mod8_bound_check(n: u64) -> Result<LemmaVerdict> {
    let table = residue_stream_with(Modulus::new(8)?, n, &Budget::from_env())?;
    Ok(mod8_bound_check_table(&table, n))
}

pub(crate) fn mod8_bound_check_table(table: &ResidueTable, n: u64) -> LemmaVerdict {
    assert_eq!(table.modulus().get(), 8);
    let mut counts = [0u64; 8];
    let mut first = None;
    for k in 1..=n {
        counts[table.get(k) as usize] += 1;
        let rhs = k as f64 / 6.0 - 2.0 * (k as f64).ln() - 11.0;
        if let Some(&x) = MOD8_CLASSES
            .iter()
            .find(|&&x| counts[x as usize] as f64 <= rhs)
        {
            first = Some(vec![k, x as u64]);
            break;
        }
    }
    LemmaVerdict::new("mod8-counting-bound", n, first.map(Witness::Indices))
}
