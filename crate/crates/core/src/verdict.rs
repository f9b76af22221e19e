//! Pass/fail records shared by every finite-range verifier.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// First counterexample of a failed check: sequence indices for the
/// combinatorial lemmas, sample coordinates for the real-variable ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Indices(Vec<u64>),
    Point(Vec<f64>),
}

/// Outcome of checking one lemma over `[1, N]`.
///
/// `status` is `Fail` exactly when `counterexample` is present; build values
/// through [`LemmaVerdict::new`] to keep that true.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub lemma_id: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub status: Status,
    pub counterexample: Option<Witness>,
}

impl LemmaVerdict {
    pub fn new(lemma_id: impl Into<String>, n: u64, counterexample: Option<Witness>) -> Self {
        let status = if counterexample.is_some() {
            Status::Fail
        } else {
            Status::Pass
        };
        Self {
            lemma_id: lemma_id.into(),
            n,
            status,
            counterexample,
        }
    }

    pub fn pass(lemma_id: impl Into<String>, n: u64) -> Self {
        Self::new(lemma_id, n, None)
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub(crate) fn first_index(
        lemma_id: impl Into<String>,
        n: u64,
        first: Option<Vec<u64>>,
    ) -> Self {
        Self::new(lemma_id, n, first.map(Witness::Indices))
    }
}
