use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::seqcore::{Budget, Modulus};

/// Largest `j` accepted by [`build_coefficient_table`].
pub const MAX_J: u32 = 24;

// rough heap cost of one coefficient entry
const BYTES_PER_ENTRY: u64 = 32;

/// Number of window-set elements for a given `j`: `2^(j+1) - 2 - j`.
pub fn row_count(j: u32) -> u64 {
    (1u64 << (j + 1)) - 2 - j as u64
}

/// Position of row `(i, 1)` in the flattened row order.
pub(crate) fn row_offset(i: u32) -> usize {
    (1usize << i) - i as usize - 1
}

/// Expresses each window-set element `a(2^i k + t)` (`1 <= i <= j`,
/// `1 <= t <= 2^i - 1`) as a non-negative integer combination of the base
/// elements `a(2^s k + 1)`, `1 <= s <= j`. The coefficients do not depend
/// on `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    j: u32,
    rows: Vec<Vec<BigUint>>,
}

pub fn build_coefficient_table(j: u32) -> Result<CoefficientTable> {
    build_coefficient_table_with(j, &Budget::from_env())
}

pub fn build_coefficient_table_with(j: u32, budget: &Budget) -> Result<CoefficientTable> {
    if !(1..=MAX_J).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "j must be in 1..={MAX_J}, got {j}"
        )));
    }
    let entries = row_count(j) * j as u64;
    budget.check_bytes("coefficient table", entries * BYTES_PER_ENTRY)?;

    let width = j as usize;
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(row_count(j) as usize);
    for i in 1..=j {
        let mut unit = vec![BigUint::zero(); width];
        unit[(i - 1) as usize] = BigUint::one();
        rows.push(unit);
        for t in 2..(1usize << i) {
            let prev = rows.last().expect("row (i, t-1) exists");
            let half = &rows[row_offset(i - 1) + t / 2 - 1];
            let next: Vec<BigUint> = prev.iter().zip(half).map(|(a, b)| a + b).collect();
            rows.push(next);
        }
    }
    Ok(CoefficientTable { j, rows })
}

impl CoefficientTable {
    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Coefficient vector of `a(2^i k + t)`.
    pub fn get(&self, i: u32, t: usize) -> &[BigUint] {
        assert!((1..=self.j).contains(&i), "level {i} out of range");
        assert!(t >= 1 && t < (1usize << i), "offset {t} out of range");
        &self.rows[row_offset(i) + t - 1]
    }

    /// All rows in `(i, t)` order.
    pub fn rows(&self) -> impl Iterator<Item = ((u32, usize), &[BigUint])> {
        (1..=self.j)
            .flat_map(|i| (1..(1usize << i)).map(move |t| (i, t)))
            .zip(self.rows.iter().map(Vec::as_slice))
    }

    /// Coefficients reduced mod `m`, flattened row-major with `j` entries
    /// per row.
    pub fn reduce(&self, m: Modulus) -> ReducedCoefficients {
        let mb = BigUint::from(m.get());
        let coeffs = self
            .rows
            .iter()
            .flat_map(|row| row.iter())
            .map(|c| (c % &mb).to_u32().expect("residue fits in u32"))
            .collect();
        ReducedCoefficients {
            modulus: m,
            width: self.j as usize,
            coeffs,
        }
    }
}

/// A [`CoefficientTable`] reduced modulo `m`.
#[derive(Debug, Clone)]
pub struct ReducedCoefficients {
    modulus: Modulus,
    width: usize,
    coeffs: Vec<u32>,
}

impl ReducedCoefficients {
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn row_count(&self) -> usize {
        self.coeffs.len() / self.width
    }

    /// Residue of every window-set element for the given base residues,
    /// each computed as an explicit dot product.
    pub fn evaluate(&self, base: &[u32]) -> Vec<u32> {
        assert_eq!(base.len(), self.width, "tuple length must equal j");
        let m = self.modulus.get() as u64;
        self.coeffs
            .chunks_exact(self.width)
            .map(|row| {
                let dot: u64 = row
                    .iter()
                    .zip(base)
                    .map(|(&c, &b)| c as u64 * b as u64 % m)
                    .sum();
                (dot % m) as u32
            })
            .collect()
    }

    /// Number of window-set elements congruent to `x`.
    pub fn hits(&self, base: &[u32], x: u32) -> u32 {
        assert_eq!(base.len(), self.width, "tuple length must equal j");
        let m = self.modulus.get() as u64;
        let x = x as u64;
        self.coeffs
            .chunks_exact(self.width)
            .filter(|row| {
                let dot: u64 = row
                    .iter()
                    .zip(base)
                    .map(|(&c, &b)| c as u64 * b as u64 % m)
                    .sum();
                dot % m == x
            })
            .count() as u32
    }
}
