//! Exact minimum of the window-set hit count over all admissible base tuples.
//!
//! Depth-first over the base coordinates `b_1..b_j`. Level `i` of the window
//! set is `b_i + D_i(t)` with `D_i(1) = 0` and
//! `D_i(t) = D_i(t-1) + row_{i-1}(floor(t/2))`, so a node holds only its
//! parent's row and every child of the node shares one histogram of `D_i`:
//! the hits a child adds are `hist[(x - b_i) mod m]`. Leaves are never
//! materialised.
//!
//! The tuple space is split into lexicographically ordered prefix
//! partitions. A partition prunes a branch once its partial count reaches the
//! partition's own best, or exceeds the best found by any partition. Ties
//! with other partitions are never pruned, so each partition that contains
//! a global minimiser reports its lexicographically first one and the merge
//! (lowest count, then earliest partition) is independent of scheduling.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficients::row_count;
use super::tuples::{admissible_tuples, AdmissibleTupleSpec};
use super::Certificate;
use crate::error::{Error, Result};
use crate::seqcore::Modulus;

/// Largest `j` the search accepts (three `2^j`-word buffers per level).
pub const MAX_SEARCH_J: u32 = 24;

const TARGET_PARTITIONS: u128 = 256;
const BUDGET_CHECK_INTERVAL: u64 = 1 << 16;

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub time_budget: Option<Duration>,
    pub tuple_budget: Option<u64>,
    /// Progress file updated after every completed partition; an existing
    /// file for the same `(x, m, j)` is resumed.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PartitionRecord {
    index: usize,
    hits: Option<u32>,
    tuple: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SearchCheckpoint {
    x: u32,
    m: u32,
    j: u32,
    partition_depth: u32,
    partitions: usize,
    global_min: Option<u32>,
    tuples_examined: u64,
    completed: Vec<PartitionRecord>,
}

impl SearchCheckpoint {
    fn load(path: &Path) -> Result<Option<Self>> {
        match std::fs::read(path) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(self)?)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Outcome {
    best: Option<(u32, Vec<u32>)>,
    aborted: bool,
}

struct Shared<'a> {
    x: u32,
    m: u32,
    j: usize,
    spec: &'a AdmissibleTupleSpec,
    opts: &'a SearchOptions,
    start: Instant,
    global_best: AtomicU32,
    examined: AtomicU64,
    abort: AtomicBool,
    abort_reason: Mutex<Option<String>>,
}

impl Shared<'_> {
    fn over_budget(&self) -> bool {
        if self.abort.load(Ordering::Relaxed) {
            return true;
        }
        let reason =
            if let Some(limit) = self.opts.time_budget.filter(|&t| self.start.elapsed() > t) {
                Some(format!("time budget of {:.1}s", limit.as_secs_f64()))
            } else {
                self.opts
                    .tuple_budget
                    .filter(|&b| self.examined.load(Ordering::Relaxed) > b)
                    .map(|b| format!("tuple budget of {b}"))
            };
        if let Some(reason) = reason {
            self.abort.store(true, Ordering::Relaxed);
            self.abort_reason.lock().unwrap().get_or_insert(reason);
            return true;
        }
        false
    }
}

struct Worker<'s, 'a> {
    shared: &'s Shared<'a>,
    prefix: &'s [u32],
    follow: Vec<u32>,
    // per level, 1-based offsets: rows[i][t], diffs[i][t] for 1 <= t < 2^i
    rows: Vec<Vec<u32>>,
    diffs: Vec<Vec<u32>>,
    hist: Vec<Vec<u32>>,
    tuple: Vec<u32>,
    local_best: u32,
    witness: Option<Vec<u32>>,
    pending: u64,
}

impl<'s, 'a> Worker<'s, 'a> {
    fn new(shared: &'s Shared<'a>, prefix: &'s [u32]) -> Self {
        let j = shared.j;
        let m = shared.m as usize;
        let buf = |i: usize| {
            if i == 0 {
                Vec::new()
            } else {
                vec![0u32; 1 << i]
            }
        };
        Self {
            shared,
            prefix,
            follow: shared.spec.follow_values(prefix[0]),
            rows: (0..j).map(buf).collect(),
            diffs: (0..j).map(buf).collect(),
            hist: (0..=j)
                .map(|i| if i == 0 { Vec::new() } else { vec![0; m] })
                .collect(),
            tuple: vec![0; j],
            local_best: u32::MAX,
            witness: None,
            pending: 0,
        }
    }

    fn run(mut self) -> Outcome {
        let aborted = self.expand(1, 0);
        self.flush();
        Outcome {
            best: self.witness.map(|w| (self.local_best, w)),
            aborted,
        }
    }

    fn flush(&mut self) {
        self.shared
            .examined
            .fetch_add(self.pending, Ordering::Relaxed);
        self.pending = 0;
    }

    #[inline]
    fn allowed(&self, hits: u32) -> bool {
        hits < self.local_best && hits <= self.shared.global_best.load(Ordering::Relaxed)
    }

    /// Chooses coordinate `level` given rows `1..level`; returns true when
    /// the search was aborted.
    fn expand(&mut self, level: usize, hits: u32) -> bool {
        let m = self.shared.m;
        let j = self.shared.j;
        let len = 1usize << level;
        let last = level == j;

        let hist = &mut self.hist[level];
        hist.fill(0);
        if level == 1 {
            hist[0] = 1;
            if !last {
                self.diffs[1][1] = 0;
            }
        } else {
            let prev = &self.rows[level - 1];
            let mut acc = 0u32;
            if last {
                hist[0] += 1;
                for t in 2..len {
                    acc += prev[t >> 1];
                    if acc >= m {
                        acc -= m;
                    }
                    hist[acc as usize] += 1;
                }
            } else {
                let d = &mut self.diffs[level];
                d[1] = 0;
                hist[0] += 1;
                for t in 2..len {
                    acc += prev[t >> 1];
                    if acc >= m {
                        acc -= m;
                    }
                    d[t] = acc;
                    hist[acc as usize] += 1;
                }
            }
        }

        let forced = self.prefix.get(level - 1).copied();
        let choices = if forced.is_some() {
            1
        } else {
            self.follow.len()
        };
        if last {
            self.pending += choices as u64;
            if self.pending >= BUDGET_CHECK_INTERVAL {
                self.flush();
                if self.shared.over_budget() {
                    return true;
                }
            }
        }
        for c in 0..choices {
            let b = forced.unwrap_or_else(|| self.follow[c]);
            let target = if self.shared.x >= b {
                self.shared.x - b
            } else {
                self.shared.x + m - b
            };
            let child = hits + self.hist[level][target as usize];
            if !self.allowed(child) {
                continue;
            }
            self.tuple[level - 1] = b;
            if last {
                self.local_best = child;
                self.witness = Some(self.tuple.clone());
                self.shared.global_best.fetch_min(child, Ordering::Relaxed);
            } else {
                let d = &self.diffs[level];
                let row = &mut self.rows[level];
                for t in 1..len {
                    let v = b + d[t];
                    row[t] = if v >= m { v - m } else { v };
                }
                if self.expand(level + 1, child) {
                    return true;
                }
            }
        }
        false
    }
}

fn partition_prefixes(spec: &AdmissibleTupleSpec) -> (u32, Vec<Vec<u32>>) {
    let firsts = spec.first_values();
    let follow_len = spec.follow_values(firsts[0]).len() as u128;
    let mut depth = 1u32;
    let mut count = firsts.len() as u128;
    while depth < spec.j && count < TARGET_PARTITIONS {
        depth += 1;
        count *= follow_len;
    }
    let mut prefixes = Vec::with_capacity(count as usize);
    for &first in &firsts {
        let follow = spec.follow_values(first);
        let mut level: Vec<Vec<u32>> = vec![vec![first]];
        for _ in 1..depth {
            level = level
                .into_iter()
                .flat_map(|p| {
                    follow.iter().map(move |&b| {
                        let mut q = p.clone();
                        q.push(b);
                        q
                    })
                })
                .collect();
        }
        prefixes.extend(level);
    }
    (depth, prefixes)
}

pub fn search_min_hits(x: u32, m: Modulus, j: u32) -> Result<Certificate> {
    search_min_hits_with(x, m, j, &SearchOptions::default())
}

pub fn search_min_hits_with(
    x: u32,
    m: Modulus,
    j: u32,
    opts: &SearchOptions,
) -> Result<Certificate> {
    let spec = admissible_tuples(m, j)?;
    if x >= m.get() {
        return Err(Error::InvalidArgument(format!(
            "residue {x} is not in [0, {m})"
        )));
    }
    if j > MAX_SEARCH_J {
        return Err(Error::InvalidArgument(format!(
            "j must be at most {MAX_SEARCH_J}, got {j}"
        )));
    }
    let start = Instant::now();
    let (depth, prefixes) = partition_prefixes(&spec);

    let mut done: BTreeMap<usize, Option<(u32, Vec<u32>)>> = BTreeMap::new();
    let mut prior_examined = 0;
    if let Some(path) = &opts.checkpoint {
        if let Some(cp) = SearchCheckpoint::load(path)? {
            if (cp.x, cp.m, cp.j, cp.partition_depth, cp.partitions)
                != (x, m.get(), j, depth, prefixes.len())
            {
                return Err(Error::Checkpoint(format!(
                    "{} belongs to a different search",
                    path.display()
                )));
            }
            prior_examined = cp.tuples_examined;
            for r in cp.completed {
                done.insert(r.index, r.hits.zip(r.tuple));
            }
        }
    }

    let shared = Shared {
        x,
        m: m.get(),
        j: j as usize,
        spec: &spec,
        opts,
        start,
        global_best: AtomicU32::new(
            done.values()
                .flatten()
                .map(|(h, _)| *h)
                .min()
                .unwrap_or(u32::MAX),
        ),
        examined: AtomicU64::new(0),
        abort: AtomicBool::new(false),
        abort_reason: Mutex::new(None),
    };
    let progress = Mutex::new(SearchCheckpoint {
        x,
        m: m.get(),
        j,
        partition_depth: depth,
        partitions: prefixes.len(),
        global_min: None,
        tuples_examined: prior_examined,
        completed: done
            .iter()
            .map(|(&index, best)| PartitionRecord {
                index,
                hits: best.as_ref().map(|b| b.0),
                tuple: best.as_ref().map(|b| b.1.clone()),
            })
            .collect(),
    });

    let outcomes: Vec<Result<Outcome>> = prefixes
        .par_iter()
        .enumerate()
        .map(|(index, prefix)| {
            if let Some(best) = done.get(&index) {
                return Ok(Outcome {
                    best: best.clone(),
                    aborted: false,
                });
            }
            if shared.over_budget() {
                return Ok(Outcome {
                    best: None,
                    aborted: true,
                });
            }
            let outcome = Worker::new(&shared, prefix).run();
            if !outcome.aborted {
                if let Some(path) = &opts.checkpoint {
                    let mut cp = progress.lock().unwrap();
                    cp.completed.push(PartitionRecord {
                        index,
                        hits: outcome.best.as_ref().map(|b| b.0),
                        tuple: outcome.best.as_ref().map(|b| b.1.clone()),
                    });
                    cp.completed.sort_by_key(|r| r.index);
                    cp.global_min = Some(shared.global_best.load(Ordering::Relaxed));
                    cp.tuples_examined = prior_examined + shared.examined.load(Ordering::Relaxed);
                    cp.store(path)?;
                }
            }
            Ok(outcome)
        })
        .collect();

    let mut aborted = false;
    let mut best: Option<(u32, Vec<u32>)> = None;
    for outcome in outcomes {
        let outcome = outcome?;
        aborted |= outcome.aborted;
        if let Some((h, t)) = outcome.best {
            if best.as_ref().is_none_or(|(bh, _)| h < *bh) {
                best = Some((h, t));
            }
        }
    }

    let (e, witness) = best.unwrap_or((row_count(j) as u32, Vec::new()));
    let cert = Certificate::new(
        x,
        m.get(),
        j,
        e,
        witness,
        prior_examined + shared.examined.load(Ordering::Relaxed),
        start.elapsed().as_secs_f64(),
        !aborted,
    );
    if aborted {
        let limit = shared
            .abort_reason
            .lock()
            .unwrap()
            .clone()
            .unwrap_or_else(|| "budget".into());
        return Err(Error::BudgetExceeded {
            limit,
            partial: Box::new(cert),
        });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u32) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn tiny_instances() {
        let c = search_min_hits(0, m(3), 2).unwrap();
        assert_eq!(c.e, 1);
        assert!(c.certified);
        let c = search_min_hits(1, m(3), 2).unwrap();
        assert_eq!(c.e, 0);
        // all-zero tuple has no element ≡ 1
        assert_eq!(c.witness_tuple, vec![0, 0]);
    }

    #[test]
    fn j_one() {
        // single element b_1: some admissible value avoids x unless m_* = 1
        let c = search_min_hits(0, m(3), 1).unwrap();
        assert_eq!((c.e, c.witness_tuple.clone()), (0, vec![1]));
    }

    #[test]
    fn partitions_cover_domain_in_order() {
        let spec = admissible_tuples(m(12), 6).unwrap();
        let (depth, prefixes) = partition_prefixes(&spec);
        let follow = 3u128;
        assert_eq!(
            prefixes.len() as u128,
            spec.total_count / follow.pow(6 - depth)
        );
        assert!(prefixes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn precondition_errors() {
        assert!(search_min_hits(3, m(3), 2).is_err());
        assert!(matches!(
            search_min_hits(0, m(8), 2),
            Err(Error::UnsupportedModulus { .. })
        ));
        assert!(search_min_hits(0, m(3), 25).is_err());
    }

    #[test]
    fn tuple_budget_yields_partial() {
        let opts = SearchOptions {
            tuple_budget: Some(10),
            ..Default::default()
        };
        match search_min_hits_with(0, m(3), 10, &opts) {
            Err(Error::BudgetExceeded { partial, limit }) => {
                assert!(!partial.certified);
                assert!(limit.contains("tuple budget"));
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
