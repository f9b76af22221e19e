//! Workbench for the sequence `a(1) = 1`, `a(n) = a(n-1) + a(floor(n/2))`.
//!
//! The crate is organised around the sequence itself ([`seqcore`]) and the
//! verifications built on top of it:
//!
//! * [`census`]: residue-class counts and conjectured limiting densities.
//! * [`structure`]: finite-range checks of the mod 8/16/32 congruence lemmas.
//! * [`certify`]: window-set coefficient expansion, exhaustive base-tuple
//!   search and lower-density certificates.
//! * [`growth`]: exact big-integer growth checks against `n^f(n)` and the
//!   helper inequalities used to prove them.
//! * [`checkpoint`] and [`cli`]: resumable residue passes and the `seqlab`
//!   command line front end.

pub mod census;
pub mod certify;
pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod growth;
pub mod seqcore;
pub mod structure;
pub mod verdict;

pub use error::{Error, Result};
pub use seqcore::{
    exact_prefix, parity_predict, residue_stream, two_adic_valuation, Budget, ExactPrefix, Modulus,
    Parity, ResidueTable,
};
pub use verdict::{LemmaVerdict, Status, Witness};
