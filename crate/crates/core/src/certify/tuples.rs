use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqcore::Modulus;

/// Which residues a base element may take modulo `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `m` odd: every residue.
    All,
    /// `m ≡ 2 (mod 4)`: odd residues (base elements are always odd).
    Odd,
    /// `4 | m`: odd residues, all coordinates in the same class mod 4.
    OddSharedMod4,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibleTupleSpec {
    pub modulus: Modulus,
    pub j: u32,
    pub domain: Domain,
    pub total_count: u128,
}

pub fn admissible_tuples(m: Modulus, j: u32) -> Result<AdmissibleTupleSpec> {
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    if m.odd_part() == 1 {
        return Err(Error::UnsupportedModulus {
            m: m.get() as u64,
            reason: "powers of two have no odd part to enumerate",
        });
    }
    let domain = match m.two_exponent() {
        0 => Domain::All,
        1 => Domain::Odd,
        _ => Domain::OddSharedMod4,
    };
    let per_class = (m.odd_part() as u128)
        .checked_pow(j)
        .ok_or_else(|| Error::InvalidArgument(format!("{}^{j} tuples overflow", m.odd_part())))?;
    let total_count = match domain {
        Domain::OddSharedMod4 => per_class * 2,
        _ => per_class,
    };
    Ok(AdmissibleTupleSpec {
        modulus: m,
        j,
        domain,
        total_count,
    })
}

impl AdmissibleTupleSpec {
    /// Allowed values of the first coordinate, ascending.
    pub fn first_values(&self) -> Vec<u32> {
        let m = self.modulus.get();
        match self.domain {
            Domain::All => (0..m).collect(),
            Domain::Odd | Domain::OddSharedMod4 => (1..m).step_by(2).collect(),
        }
    }

    /// Allowed values of coordinates `2..=j` once the first is fixed.
    pub fn follow_values(&self, first: u32) -> Vec<u32> {
        let m = self.modulus.get();
        match self.domain {
            Domain::All => (0..m).collect(),
            Domain::Odd => (1..m).step_by(2).collect(),
            Domain::OddSharedMod4 => (first % 4..m).step_by(4).collect(),
        }
    }

    pub fn contains(&self, tuple: &[u32]) -> bool {
        if tuple.len() != self.j as usize {
            return false;
        }
        let m = self.modulus.get();
        if tuple.iter().any(|&b| b >= m) {
            return false;
        }
        match self.domain {
            Domain::All => true,
            Domain::Odd => tuple.iter().all(|b| b % 2 == 1),
            Domain::OddSharedMod4 => {
                tuple[0] % 2 == 1 && tuple.iter().all(|b| b % 4 == tuple[0] % 4)
            }
        }
    }

    /// Visits every admissible tuple in lexicographic order.
    pub fn for_each<F: FnMut(&[u32])>(&self, mut f: F) {
        let j = self.j as usize;
        for first in self.first_values() {
            let follow = self.follow_values(first);
            let mut digits = vec![0usize; j - 1];
            let mut tuple: Vec<u32> = std::iter::once(first)
                .chain(std::iter::repeat_n(follow[0], j - 1))
                .collect();
            loop {
                f(&tuple);
                // odometer over coordinates 2..=j
                let mut pos = j - 1;
                loop {
                    if pos == 0 {
                        break;
                    }
                    let d = pos - 1;
                    digits[d] += 1;
                    if digits[d] < follow.len() {
                        tuple[pos] = follow[digits[d]];
                        break;
                    }
                    digits[d] = 0;
                    tuple[pos] = follow[0];
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: u32, j: u32) -> AdmissibleTupleSpec {
        admissible_tuples(Modulus::new(m).unwrap(), j).unwrap()
    }

    fn all(s: &AdmissibleTupleSpec) -> Vec<Vec<u32>> {
        let mut v = Vec::new();
        s.for_each(|t| v.push(t.to_vec()));
        v
    }

    #[test]
    fn counts() {
        assert_eq!(spec(3, 2).total_count, 9);
        assert_eq!(spec(6, 2).total_count, 9);
        assert_eq!(spec(6, 2).first_values(), vec![1, 3, 5]);
        assert_eq!(spec(12, 2).total_count, 18);
        assert_eq!(spec(5, 10).total_count, 9_765_625);
        assert!(matches!(
            admissible_tuples(Modulus::new(16).unwrap(), 3),
            Err(Error::UnsupportedModulus { m: 16, .. })
        ));
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        for (m, j) in [(3, 1), (3, 3), (6, 2), (12, 3), (20, 2), (7, 2)] {
            let s = spec(m, j);
            let v = all(&s);
            assert_eq!(v.len() as u128, s.total_count, "m={m} j={j}");
            assert!(v.windows(2).all(|w| w[0] < w[1]));
            assert!(v.iter().all(|t| s.contains(t)));
        }
        assert_eq!(all(&spec(12, 2))[..3], [vec![1, 1], vec![1, 5], vec![1, 9]]);
    }

    #[test]
    fn membership() {
        let s = spec(12, 3);
        assert!(s.contains(&[3, 7, 11]));
        assert!(!s.contains(&[3, 5, 11]));
        assert!(!s.contains(&[3, 7]));
        assert!(!spec(6, 2).contains(&[2, 3]));
        assert!(spec(3, 2).contains(&[0, 2]));
    }
}
