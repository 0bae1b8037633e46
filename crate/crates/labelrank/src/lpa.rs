//! Synchronous label propagation (LPA) baseline with seeded random
//! tie-breaking, for head-to-head comparisons against LabelRank and for
//! demonstrating LPA's run-to-run instability.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Graph;
use crate::metrics::{self, Partition};

/// Errors from the LPA commands.
#[derive(Debug, Error)]
pub enum LpaError {
    #[error("a stability report needs at least 2 seeds, got {0}")]
    TooFewSeeds(usize),
}

/// Outcome of one LPA run.
#[derive(Debug, Clone)]
pub struct LpaResult {
    /// Final labels grouped into communities (canonical ids).
    pub partition: Partition,
    /// Raw final label per node, before canonicalization.
    pub labels: Vec<u32>,
    /// Sweeps executed, counting the final no-change sweep.
    pub iterations: u32,
    /// False when the iteration cap cut off a run that was still changing
    /// (synchronous LPA can oscillate between two label configurations).
    pub converged: bool,
}

/// Runs synchronous LPA: every node starts with its own id as label and each
/// sweep simultaneously adopts the most frequent label among its neighbors,
/// breaking ties uniformly at random from the seeded generator. A node's own
/// label is not counted unless a selfloop makes it a neighbor; an isolated
/// node keeps its label. Terminates when a sweep changes nothing or at
/// `max_iterations`.
///
/// Identical seeds give identical partitions: nodes are processed in index
/// order and tied label sets are sorted before drawing, so the result is a
/// pure function of `(g, seed, max_iterations)`.
pub fn run_lpa(g: &Graph, seed: u64, max_iterations: u32) -> LpaResult {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut neighbor_labels: Vec<u32> = Vec::new();
    let mut tied: Vec<u32> = Vec::new();

    for iteration in 1..=max_iterations {
        iterations = iteration;
        let mut next = vec![0u32; n];
        let mut changed = false;
        for i in 0..n {
            let row = g.neighbors(i as u32);
            if row.is_empty() {
                next[i] = labels[i];
                continue;
            }
            neighbor_labels.clear();
            neighbor_labels.extend(row.iter().map(|&j| labels[j as usize]));
            neighbor_labels.sort_unstable();

            tied.clear();
            let mut best = 0usize;
            let mut index = 0;
            while index < neighbor_labels.len() {
                let label = neighbor_labels[index];
                let mut count = 0;
                while index < neighbor_labels.len() && neighbor_labels[index] == label {
                    count += 1;
                    index += 1;
                }
                if count > best {
                    best = count;
                    tied.clear();
                    tied.push(label);
                } else if count == best {
                    tied.push(label);
                }
            }
            // `tied` is ascending because `neighbor_labels` was sorted.
            next[i] = if tied.len() == 1 { tied[0] } else { tied[rng.random_range(0..tied.len())] };
            changed |= next[i] != labels[i];
        }
        if !changed {
            converged = true;
            break;
        }
        labels = next;
    }

    LpaResult { partition: Partition::from_assignment(&labels), labels, iterations, converged }
}

/// One row of a [`StabilityReport`].
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub modularity: f64,
    pub communities: usize,
    pub iterations: u32,
    pub converged: bool,
}

/// How stable LPA is on a graph across seeds.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Per-seed outcomes, in input order.
    pub runs: Vec<SeedRun>,
    /// Partitions that differ as groupings (community labels ignored).
    pub distinct_partitions: usize,
    pub min_q: f64,
    pub max_q: f64,
    pub mean_q: f64,
    /// The first seed attaining `max_q`.
    pub best_seed: u64,
}

/// Runs LPA once per seed and reports how many distinct partitions appear
/// along with min/max/mean modularity. Partition equality is tested after
/// canonical relabeling, so differently-labeled identical groupings count
/// once.
///
/// # Errors
///
/// [`LpaError::TooFewSeeds`] when fewer than 2 seeds are given.
pub fn lpa_stability_report(g: &Graph, seeds: &[u64], max_iterations: u32) -> Result<StabilityReport, LpaError> {
    if seeds.len() < 2 {
        return Err(LpaError::TooFewSeeds(seeds.len()));
    }
    let mut runs = Vec::with_capacity(seeds.len());
    let mut groupings: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    let mut sum_q = 0.0;
    let mut best_seed = seeds[0];
    for &seed in seeds {
        let result = run_lpa(g, seed, max_iterations);
        let q = metrics::modularity(g, &result.partition).expect("LPA covers every node");
        groupings.insert(result.partition.assignment().to_vec());
        if q > max_q {
            max_q = q;
            best_seed = seed;
        }
        min_q = min_q.min(q);
        sum_q += q;
        runs.push(SeedRun {
            seed,
            modularity: q,
            communities: result.partition.community_count(),
            iterations: result.iterations,
            converged: result.converged,
        });
    }
    Ok(StabilityReport {
        distinct_partitions: groupings.len(),
        min_q,
        max_q,
        mean_q: sum_q / seeds.len() as f64,
        best_seed,
        runs,
    })
}
