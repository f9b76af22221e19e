use thiserror::Error;

use crate::certify::Certificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus {0}: must be at least 2")]
    InvalidModulus(u64),

    #[error("modulus {0} is too large for residue tables (at most 65536)")]
    ModulusTooLarge(u64),

    #[error("capacity exceeded for {what}: needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u64,
        limit: u64,
    },

    #[error("unsupported modulus {m}: {reason}")]
    UnsupportedModulus { m: u64, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {needed} is beyond the table limit {limit}")]
    OutOfRange { needed: u64, limit: u64 },

    #[error("search budget exceeded ({limit}); best upper bound so far e <= {}", partial.e)]
    BudgetExceeded {
        limit: String,
        partial: Box<Certificate>,
    },

    #[error("certificate for x={x}, m={m}, j={j} is not certified")]
    Uncertified { x: u32, m: u32, j: u32 },

    #[error("precision exhausted while deciding n = {n}")]
    PrecisionExhausted { n: u64 },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
