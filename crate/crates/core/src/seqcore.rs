//! Exact and modular evaluation of `a(1) = 1`, `a(n) = a(n-1) + a(floor(n/2))`.
//!
//! All public indices are 1-based. Residue tables store one byte per entry
//! for moduli up to 256 and two bytes up to 65536.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus a [`ResidueTable`] can hold.
pub const MAX_TABLE_MODULUS: u32 = 1 << 16;

/// Default cap on [`exact_prefix`] length.
pub const DEFAULT_EXACT_PREFIX_CAP: u64 = 200_000;

const DEFAULT_MEM_BUDGET_MB: u64 = 4096;

/// Allocation limits for tables. `SEQLAB_MEM_BUDGET_MB` overrides the
/// memory cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub mem_bytes: u64,
    pub exact_prefix_cap: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            mem_bytes: DEFAULT_MEM_BUDGET_MB << 20,
            exact_prefix_cap: DEFAULT_EXACT_PREFIX_CAP,
        }
    }
}

impl Budget {
    pub fn from_env() -> Self {
        let mut budget = Self::default();
        if let Some(mb) = std::env::var("SEQLAB_MEM_BUDGET_MB")
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
        {
            budget.mem_bytes = mb.saturating_mul(1 << 20);
        }
        budget
    }

    pub(crate) fn check_bytes(&self, what: &'static str, needed: u64) -> Result<()> {
        if needed > self.mem_bytes {
            return Err(Error::Capacity {
                what,
                needed,
                limit: self.mem_bytes,
            });
        }
        Ok(())
    }
}

/// A modulus `m = 2^two_exponent * odd_part`, `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Modulus {
    m: u32,
    odd_part: u32,
    two_exponent: u32,
}

impl Modulus {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidModulus(m as u64));
        }
        let two_exponent = m.trailing_zeros();
        Ok(Self {
            m,
            odd_part: m >> two_exponent,
            two_exponent,
        })
    }

    pub fn get(self) -> u32 {
        self.m
    }

    /// Largest odd divisor of `m`.
    pub fn odd_part(self) -> u32 {
        self.odd_part
    }

    pub fn two_exponent(self) -> u32 {
        self.two_exponent
    }

    pub fn reduce(self, v: u64) -> u32 {
        (v % self.m as u64) as u32
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;

    fn try_from(m: u32) -> Result<Self> {
        Modulus::new(m)
    }
}

impl From<Modulus> for u32 {
    fn from(m: Modulus) -> u32 {
        m.m
    }
}

impl std::fmt::Display for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Store {
    Narrow(Vec<u8>),
    Wide(Vec<u16>),
}

/// `a(k) mod m` for every `1 <= k <= limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueTable {
    modulus: Modulus,
    store: Store,
}

trait Slot: Copy {
    fn load(self) -> u32;
    fn store(v: u32) -> Self;
}

impl Slot for u8 {
    #[inline]
    fn load(self) -> u32 {
        self as u32
    }
    #[inline]
    fn store(v: u32) -> Self {
        v as u8
    }
}

impl Slot for u16 {
    #[inline]
    fn load(self) -> u32 {
        self as u32
    }
    #[inline]
    fn store(v: u32) -> Self {
        v as u16
    }
}

// `v[k - 1]` holds a(k); extends v in place from its current length to n.
fn extend_residues<T: Slot>(v: &mut Vec<T>, m: u32, n: usize) {
    if v.is_empty() && n > 0 {
        v.push(T::store(1 % m));
    }
    v.reserve(n.saturating_sub(v.len()));
    for k in v.len() + 1..=n {
        let s = v[k - 2].load() + v[k / 2 - 1].load();
        v.push(T::store(if s >= m { s - m } else { s }));
    }
}

fn entry_width(m: Modulus) -> u64 {
    if m.get() <= 256 {
        1
    } else {
        2
    }
}

impl ResidueTable {
    fn empty(modulus: Modulus) -> Result<Self> {
        if modulus.get() > MAX_TABLE_MODULUS {
            return Err(Error::ModulusTooLarge(modulus.get() as u64));
        }
        let store = if entry_width(modulus) == 1 {
            Store::Narrow(Vec::new())
        } else {
            Store::Wide(Vec::new())
        };
        Ok(Self { modulus, store })
    }

    /// Rebuilds a table from stored residues, rejecting any prefix that does
    /// not satisfy the recurrence.
    pub fn from_residues(modulus: Modulus, residues: &[u32]) -> Result<Self> {
        let mut table = Self::empty(modulus)?;
        let m = modulus.get();
        for (idx, &r) in residues.iter().enumerate() {
            let k = idx + 1;
            let expected = if k == 1 {
                1 % m
            } else {
                (residues[k - 2] + residues[k / 2 - 1]) % m
            };
            if r != expected {
                return Err(Error::Checkpoint(format!(
                    "residue at index {k} is {r}, recurrence gives {expected}"
                )));
            }
        }
        match &mut table.store {
            Store::Narrow(v) => v.extend(residues.iter().map(|&r| r as u8)),
            Store::Wide(v) => v.extend(residues.iter().map(|&r| r as u16)),
        }
        Ok(table)
    }

    /// Continues the residue pass up to index `n` (no-op if already there).
    pub fn extend_to(&mut self, n: u64, budget: &Budget) -> Result<()> {
        budget.check_bytes("residue table", n.saturating_mul(entry_width(self.modulus)))?;
        let n = usize::try_from(n).map_err(|_| Error::Capacity {
            what: "residue table",
            needed: n,
            limit: usize::MAX as u64,
        })?;
        let m = self.modulus.get();
        match &mut self.store {
            Store::Narrow(v) => extend_residues(v, m, n),
            Store::Wide(v) => extend_residues(v, m, n),
        }
        Ok(())
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Largest index held.
    pub fn limit(&self) -> u64 {
        match &self.store {
            Store::Narrow(v) => v.len() as u64,
            Store::Wide(v) => v.len() as u64,
        }
    }

    /// `a(k) mod m`. Panics when `k` is 0 or beyond [`limit`](Self::limit).
    #[inline]
    pub fn get(&self, k: u64) -> u32 {
        assert!(k >= 1, "sequence indices start at 1");
        let i = (k - 1) as usize;
        match &self.store {
            Store::Narrow(v) => v[i] as u32,
            Store::Wide(v) => v[i] as u32,
        }
    }

    /// Residues for indices `1..=limit` in order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match &self.store {
            Store::Narrow(v) => Box::new(v.iter().map(|&r| r as u32)),
            Store::Wide(v) => Box::new(v.iter().map(|&r| r as u32)),
        }
    }

    /// Raw little-endian payload, one or two bytes per entry.
    pub fn payload(&self) -> Vec<u8> {
        match &self.store {
            Store::Narrow(v) => v.clone(),
            Store::Wide(v) => v.iter().flat_map(|r| r.to_le_bytes()).collect(),
        }
    }

    pub(crate) fn narrow_slice(&self) -> Option<&[u8]> {
        match &self.store {
            Store::Narrow(v) => Some(v),
            Store::Wide(_) => None,
        }
    }

    pub(crate) fn require(&self, index: u64) -> Result<()> {
        if index > self.limit() {
            return Err(Error::OutOfRange {
                needed: index,
                limit: self.limit(),
            });
        }
        Ok(())
    }
}

/// Computes `a(1..=n) mod m` in one sequential pass.
pub fn residue_stream(m: Modulus, n: u64) -> Result<ResidueTable> {
    residue_stream_with(m, n, &Budget::from_env())
}

pub fn residue_stream_with(m: Modulus, n: u64, budget: &Budget) -> Result<ResidueTable> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "residue table limit must be >= 1".into(),
        ));
    }
    let mut table = ResidueTable::empty(m)?;
    table.extend_to(n, budget)?;
    Ok(table)
}

/// Exact values `a(1..=limit)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPrefix {
    values: Vec<BigUint>,
}

impl ExactPrefix {
    pub fn limit(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn get(&self, k: u64) -> &BigUint {
        assert!(k >= 1, "sequence indices start at 1");
        &self.values[(k - 1) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &BigUint> {
        self.values.iter()
    }
}

pub fn exact_prefix(n: u64) -> Result<ExactPrefix> {
    exact_prefix_with(n, &Budget::from_env())
}

pub fn exact_prefix_with(n: u64, budget: &Budget) -> Result<ExactPrefix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "exact prefix limit must be >= 1".into(),
        ));
    }
    if n > budget.exact_prefix_cap {
        return Err(Error::Capacity {
            what: "exact prefix",
            needed: n,
            limit: budget.exact_prefix_cap,
        });
    }
    let n = n as usize;
    let mut values: Vec<BigUint> = Vec::with_capacity(n);
    values.push(BigUint::one());
    for k in 2..=n {
        let next = &values[k - 2] + &values[k / 2 - 1];
        values.push(next);
    }
    Ok(ExactPrefix { values })
}

/// Exponent of the largest power of two dividing `n`.
pub fn two_adic_valuation(n: u64) -> u32 {
    assert!(n >= 1, "valuation of 0 is undefined");
    n.trailing_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(v: u64) -> Self {
        if v.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Parity of `a(n)` without computing it: `a(n) ≡ v2(n) + 1 (mod 2)`.
pub fn parity_predict(n: u64) -> Parity {
    Parity::of(two_adic_valuation(n) as u64 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(n: usize) -> Vec<u64> {
        let mut a = vec![0u64, 1];
        for k in 2..=n {
            a.push(a[k - 1] + a[k / 2]);
        }
        a
    }

    #[test]
    fn first_terms_mod_8() {
        let t = residue_stream(Modulus::new(8).unwrap(), 10).unwrap();
        let got: Vec<u32> = t.iter().collect();
        assert_eq!(got, vec![1, 2, 3, 5, 7, 2, 5, 2, 7, 6]);
    }

    #[test]
    fn single_entry() {
        let t = residue_stream(Modulus::new(2).unwrap(), 1).unwrap();
        assert_eq!(t.iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn never_zero_mod_4() {
        let t = residue_stream(Modulus::new(4).unwrap(), 10_000).unwrap();
        assert!(t.iter().all(|r| r != 0));
    }

    #[test]
    fn modulus_validation() {
        assert!(matches!(Modulus::new(1), Err(Error::InvalidModulus(1))));
        assert!(matches!(Modulus::new(0), Err(Error::InvalidModulus(0))));
        let m = Modulus::new(96).unwrap();
        assert_eq!((m.odd_part(), m.two_exponent()), (3, 5));
        assert!(matches!(
            residue_stream(Modulus::new(65537).unwrap(), 10),
            Err(Error::ModulusTooLarge(65537))
        ));
    }

    #[test]
    fn wide_storage_matches_naive() {
        let a = naive(5000);
        let t = residue_stream(Modulus::new(1000).unwrap(), 5000).unwrap();
        for k in 1..=5000u64 {
            assert_eq!(t.get(k) as u64, a[k as usize] % 1000);
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let budget = Budget {
            mem_bytes: 100,
            ..Budget::default()
        };
        let err = residue_stream_with(Modulus::new(3).unwrap(), 101, &budget).unwrap_err();
        assert!(matches!(err, Error::Capacity { needed: 101, .. }));
        let err = exact_prefix_with(200_001, &Budget::default()).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn exact_values() {
        let p = exact_prefix(16).unwrap();
        assert_eq!(p.get(1), &BigUint::from(1u32));
        assert_eq!(p.get(10), &BigUint::from(30u32));
        assert_eq!(p.get(16), &BigUint::from(101u32));
        assert_eq!(exact_prefix(1).unwrap().limit(), 1);
    }

    #[test]
    fn valuation_and_parity() {
        assert_eq!(two_adic_valuation(12), 2);
        assert_eq!(two_adic_valuation(7), 0);
        assert_eq!(two_adic_valuation(8), 3);
        // a(12) = 47, a(8) = 18
        assert_eq!(parity_predict(12), Parity::Odd);
        assert_eq!(parity_predict(8), Parity::Even);
        for n in (1..200).step_by(2) {
            assert_eq!(parity_predict(n), Parity::Odd);
        }
    }

    #[test]
    fn extend_is_same_as_one_pass() {
        let m = Modulus::new(7).unwrap();
        let mut t = residue_stream(m, 1234).unwrap();
        t.extend_to(9999, &Budget::default()).unwrap();
        assert_eq!(t, residue_stream(m, 9999).unwrap());
    }

    #[test]
    fn from_residues_rejects_bad_prefix() {
        let m = Modulus::new(8).unwrap();
        assert!(ResidueTable::from_residues(m, &[1, 2, 3, 5, 7]).is_ok());
        assert!(ResidueTable::from_residues(m, &[1, 2, 3, 5, 6]).is_err());
    }
}
