//! Binary snapshots of a residue pass.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `SQLB` |
//! | 4 | format version (`u32`) |
//! | 4 | modulus (`u32`) |
//! | 8 | reached index `N` (`u64`) |
//! | `N` or `2N` | residues `a(1..=N) mod m`, one byte each for `m <= 256`, else `u16` |
//! | 8 | FNV-1a 64 over the residue bytes |

use std::path::Path;

use crate::error::{Error, Result};
use crate::seqcore::{Modulus, ResidueTable};

pub const MAGIC: [u8; 4] = *b"SQLB";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

pub fn encode(table: &ResidueTable) -> Vec<u8> {
    let payload = table.payload();
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&table.modulus().get().to_le_bytes());
    out.extend_from_slice(&table.limit().to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&fnv1a64(&payload).to_le_bytes());
    out
}

fn take<const K: usize>(bytes: &[u8], at: usize) -> [u8; K] {
    bytes[at..at + K].try_into().expect("length checked")
}

pub fn decode(bytes: &[u8]) -> Result<ResidueTable> {
    let bad = |msg: String| Error::Checkpoint(msg);
    if bytes.len() < HEADER_LEN + 8 {
        return Err(bad(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(bad("missing SQLB magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, 4));
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let modulus = Modulus::new(u32::from_le_bytes(take(bytes, 8)))?;
    let n = u64::from_le_bytes(take(bytes, 12));
    let width = if modulus.get() <= 256 { 1 } else { 2 };
    let payload_len = n
        .checked_mul(width)
        .and_then(|l| usize::try_from(l).ok())
        .ok_or_else(|| bad(format!("index {n} overflows the payload size")))?;
    if bytes.len() != HEADER_LEN + payload_len + 8 {
        return Err(bad(format!(
            "expected {} bytes for N = {n}, found {}",
            HEADER_LEN + payload_len + 8,
            bytes.len()
        )));
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + payload_len];
    let stored = u64::from_le_bytes(take(bytes, HEADER_LEN + payload_len));
    if fnv1a64(payload) != stored {
        return Err(bad("checksum mismatch".into()));
    }
    let residues: Vec<u32> = if width == 1 {
        payload.iter().map(|&b| b as u32).collect()
    } else {
        payload
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
            .collect()
    };
    ResidueTable::from_residues(modulus, &residues)
}

/// Writes through a sibling temporary file and a rename, so an interrupted
/// save never leaves a truncated snapshot behind.
pub fn save(table: &ResidueTable, path: &Path) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, encode(table))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ResidueTable> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::residue_stream;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn layout_is_exact() {
        let t = residue_stream(Modulus::new(8).unwrap(), 10).unwrap();
        let b = encode(&t);
        assert_eq!(&b[..4], b"SQLB");
        assert_eq!(&b[4..8], &[1, 0, 0, 0]);
        assert_eq!(&b[8..12], &[8, 0, 0, 0]);
        assert_eq!(&b[12..20], &[10, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&b[20..30], &[1, 2, 3, 5, 7, 2, 5, 2, 7, 6]);
        assert_eq!(b.len(), 38);
    }

    #[test]
    fn round_trip_narrow_and_wide() {
        for m in [3, 256, 257, 1000] {
            let t = residue_stream(Modulus::new(m).unwrap(), 5000).unwrap();
            let b = encode(&t);
            assert_eq!(decode(&b).unwrap(), t, "m = {m}");
        }
    }

    #[test]
    fn corruption_is_rejected() {
        let t = residue_stream(Modulus::new(8).unwrap(), 100).unwrap();
        let good = encode(&t);

        let mut flipped = good.clone();
        flipped[30] ^= 1;
        assert!(decode(&flipped).is_err());

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(decode(&bad_magic).is_err());

        assert!(decode(&good[..good.len() - 1]).is_err());

        // checksum recomputed, but residues violate the recurrence
        let mut forged = good;
        forged[25] = (forged[25] + 1) % 8;
        let end = forged.len() - 8;
        let sum = fnv1a64(&forged[20..end]);
        forged[end..].copy_from_slice(&sum.to_le_bytes());
        assert!(matches!(decode(&forged), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.sqlb");
        let t = residue_stream(Modulus::new(12).unwrap(), 777).unwrap();
        save(&t, &path).unwrap();
        assert_eq!(load(&path).unwrap(), t);
    }
}
