//! The LabelRank dynamics: per-node label distributions, the four operators
//! (propagation, inflation, cutoff, conditional update), the repetition-count
//! stop criterion, the main loop, and community extraction.
//!
//! Every operator is a pure function from the previous iteration's state to
//! the next (synchronous update). Per-node work may run on any number of
//! worker threads, but each node's row is computed in a fixed summation
//! order and cross-node reductions are integer-only, so results are
//! bit-identical regardless of thread count.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;
use crate::metrics::{self, Partition};

/// Errors from parameter validation and state initialization.
#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid parameter {field}: {message}")]
    InvalidParam { field: &'static str, message: String },
    #[error("node {0} has no selfloop; apply Graph::add_selfloops first")]
    MissingSelfloop(u32),
}

/// Tunable parameters of a LabelRank run.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Inflation exponent `in >= 1`; probabilities are raised to this power
    /// and renormalized each iteration.
    pub inflation: f64,
    /// Cutoff threshold `r` in `[0, 1]`; labels below it are dropped.
    pub cutoff: f64,
    /// Conditional-update fraction `q` in `[0, 1]`; a node accepts its new
    /// distribution only when few enough neighbors already subsume its
    /// maximum-label set.
    pub update_fraction: f64,
    /// The run stops once some numChange value has been seen this many times.
    pub stop_frequency: u32,
    /// Hard iteration cap; the stop criterion is a heuristic and this
    /// guarantees termination.
    pub max_iterations: u32,
    /// Absolute tolerance used when comparing probabilities for maximum-label
    /// ties.
    pub tie_tolerance: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            inflation: 2.0,
            cutoff: 0.1,
            update_fraction: 0.6,
            stop_frequency: 5,
            max_iterations: 1000,
            tie_tolerance: 1e-9,
        }
    }
}

impl Params {
    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let invalid = |field: &'static str, message: String| DynamicsError::InvalidParam { field, message };
        if !self.inflation.is_finite() || self.inflation < 1.0 {
            return Err(invalid("inflation", format!("must be a finite value >= 1, got {}", self.inflation)));
        }
        if !self.cutoff.is_finite() || !(0.0..=1.0).contains(&self.cutoff) {
            return Err(invalid("cutoff", format!("must be within [0, 1], got {}", self.cutoff)));
        }
        if !self.update_fraction.is_finite() || !(0.0..=1.0).contains(&self.update_fraction) {
            return Err(invalid("update_fraction", format!("must be within [0, 1], got {}", self.update_fraction)));
        }
        if self.stop_frequency == 0 {
            return Err(invalid("stop_frequency", "must be at least 1".to_string()));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1".to_string()));
        }
        if !self.tie_tolerance.is_finite() || self.tie_tolerance < 0.0 {
            return Err(invalid("tie_tolerance", format!("must be a finite value >= 0, got {}", self.tie_tolerance)));
        }
        Ok(())
    }
}

/// A node's sparse probability distribution over label ids.
///
/// Entries are sorted by descending probability (ties by ascending label id),
/// hold no duplicate labels and no non-positive probabilities, and sum to 1
/// within 1e-9. A distribution is never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    entries: Vec<(u32, f64)>,
}

impl LabelDistribution {
    /// Builds a distribution from raw non-negative weights: duplicate labels
    /// are merged by summing, non-positive weights dropped, the rest
    /// normalized to sum 1.
    ///
    /// # Panics
    ///
    /// If no positive finite weight remains.
    pub fn from_weights(weights: Vec<(u32, f64)>) -> LabelDistribution {
        let mut entries = weights;
        entries.retain(|&(_, w)| w.is_finite() && w > 0.0);
        entries.sort_unstable_by_key(|&(label, _)| label);
        entries.dedup_by(|next, kept| {
            if kept.0 == next.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        assert!(!entries.is_empty(), "a label distribution cannot be empty");
        let total: f64 = entries.iter().map(|&(_, w)| w).sum();
        for entry in &mut entries {
            entry.1 /= total;
        }
        entries.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        LabelDistribution { entries }
    }

    /// `(label, probability)` pairs, highest probability first.
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// Number of labels carried.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// The probability of `label`, or 0 when absent.
    pub fn probability(&self, label: u32) -> f64 {
        self.entries.iter().find(|&&(l, _)| l == label).map_or(0.0, |&(_, p)| p)
    }

    /// The highest probability.
    pub fn max_probability(&self) -> f64 {
        self.entries[0].1
    }
}

/// The labels attaining a distribution's maximum probability within a
/// tolerance; `C*_i` in the conditional-update rule. Always non-empty,
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxLabelSet {
    labels: Vec<u32>,
}

impl MaxLabelSet {
    /// Member labels, ascending.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// The smallest member; used as the community key.
    pub fn smallest(&self) -> u32 {
        self.labels[0]
    }

    /// Subset test (`self` ⊆ `other`); both sides are sorted, so this is a
    /// linear merge.
    pub fn is_subset_of(&self, other: &MaxLabelSet) -> bool {
        let mut it = other.labels.iter();
        'outer: for &needed in &self.labels {
            for &have in it.by_ref() {
                if have == needed {
                    continue 'outer;
                }
                if have > needed {
                    return false;
                }
            }
            return false;
        }
        true
    }
}

/// All labels whose probability is within `tol` of the maximum.
pub fn max_labels(d: &LabelDistribution, tol: f64) -> MaxLabelSet {
    let threshold = d.max_probability() - tol;
    let mut labels: Vec<u32> =
        d.entries().iter().filter(|&&(_, p)| p >= threshold).map(|&(label, _)| label).collect();
    labels.sort_unstable();
    MaxLabelSet { labels }
}

/// The initial state: node `i` holds probability `1/k_i` for every neighbor
/// (itself included), so the graph must already carry selfloops.
///
/// # Errors
///
/// [`DynamicsError::MissingSelfloop`] naming the first node that is not its
/// own neighbor.
pub fn init_distributions(g: &Graph) -> Result<Vec<LabelDistribution>, DynamicsError> {
    for i in 0..g.node_count() as u32 {
        if !g.has_selfloop(i) {
            return Err(DynamicsError::MissingSelfloop(i));
        }
    }
    Ok((0..g.node_count() as u32)
        .map(|i| {
            let row = g.neighbors(i);
            let p = 1.0 / row.len() as f64;
            LabelDistribution { entries: row.iter().map(|&j| (j, p)).collect() }
        })
        .collect())
}

/// One node's propagation: the mean of its neighbors' distributions,
/// renormalized. The accumulation order is fixed (neighbors ascending, then
/// a stable sort by label), so the floating-point result does not depend on
/// thread scheduling.
fn propagate_row(g: &Graph, state: &[LabelDistribution], i: u32) -> LabelDistribution {
    let row = g.neighbors(i);
    let mut gathered: Vec<(u32, f64)> = Vec::with_capacity(row.iter().map(|&j| state[j as usize].support_size()).sum());
    for &j in row {
        gathered.extend_from_slice(state[j as usize].entries());
    }
    gathered.sort_by_key(|&(label, _)| label);
    let mut merged: Vec<(u32, f64)> = Vec::with_capacity(gathered.len());
    for (label, p) in gathered {
        match merged.last_mut() {
            Some(last) if last.0 == label => last.1 += p,
            _ => merged.push((label, p)),
        }
    }
    let k = row.len() as f64;
    for entry in &mut merged {
        entry.1 /= k;
    }
    LabelDistribution::from_weights(merged)
}

/// Synchronous propagation: `P'_i(c) = sum_{j in Nb(i)} P_j(c) / k_i` for
/// every node at once, each row renormalized against floating-point drift.
/// The input state is untouched.
pub fn propagate(g: &Graph, state: &[LabelDistribution]) -> Vec<LabelDistribution> {
    (0..g.node_count() as u32)
        .into_par_iter()
        .map(|i| propagate_row(g, state, i))
        .collect()
}

/// Inflation: each probability is raised to the `inflation` power and the
/// row renormalized. The support is unchanged and the probability ordering
/// preserved; `inflation = 1` is the identity.
pub fn inflate(d: &LabelDistribution, inflation: f64) -> LabelDistribution {
    if inflation == 1.0 {
        return d.clone();
    }
    LabelDistribution::from_weights(
        d.entries().iter().map(|&(label, p)| (label, p.powf(inflation))).collect(),
    )
}

/// Cutoff: entries with probability strictly below `r` are removed and the
/// remainder renormalized. When every entry falls below `r`, the maximum
/// labels (within `tie_tolerance`) are retained instead, so a distribution
/// never comes out empty.
pub fn cutoff(d: &LabelDistribution, r: f64, tie_tolerance: f64) -> LabelDistribution {
    let kept: Vec<(u32, f64)> = d.entries().iter().filter(|&&(_, p)| p >= r).copied().collect();
    if !kept.is_empty() {
        return LabelDistribution::from_weights(kept);
    }
    let survivors = max_labels(d, tie_tolerance);
    LabelDistribution::from_weights(
        d.entries()
            .iter()
            .filter(|&&(label, _)| survivors.labels().binary_search(&label).is_ok())
            .copied()
            .collect(),
    )
}

/// Conditional update: node `i` accepts `proposed[i]` only when
/// `sum_{j in Nb(i)} [C*_i ⊆ C*_j] <= q * k_i`, with all maximum-label sets
/// `C*` taken from `previous` (the previous time step) and `Nb(i)`/`k_i`
/// including the selfloop, whose term is always 1 since `C*_i ⊆ C*_i`.
/// Rejected nodes keep their previous distribution.
///
/// Returns the next state and `numChange`, the number of nodes that accepted
/// the update (whether or not the accepted row numerically differs).
pub fn conditional_update(
    g: &Graph,
    previous: &[LabelDistribution],
    proposed: Vec<LabelDistribution>,
    q: f64,
    tie_tolerance: f64,
) -> (Vec<LabelDistribution>, usize) {
    let maxima: Vec<MaxLabelSet> = previous.par_iter().map(|d| max_labels(d, tie_tolerance)).collect();
    let accepted: Vec<bool> = (0..g.node_count() as u32)
        .into_par_iter()
        .map(|i| {
            let row = g.neighbors(i);
            let subsumed = row.iter().filter(|&&j| maxima[i as usize].is_subset_of(&maxima[j as usize])).count();
            subsumed as f64 <= q * row.len() as f64
        })
        .collect();
    let num_change = accepted.iter().filter(|&&a| a).count();
    let next = proposed
        .into_iter()
        .zip(&accepted)
        .enumerate()
        .map(|(i, (new_row, &take))| if take { new_row } else { previous[i].clone() })
        .collect();
    (next, num_change)
}

/// One full iteration: propagate, inflate, cutoff, then conditionally
/// update. Returns the next state and numChange. This is exactly the loop
/// body of [`run_labelrank`], exposed for step-by-step inspection.
pub fn iterate_once(g: &Graph, state: &[LabelDistribution], params: &Params) -> (Vec<LabelDistribution>, usize) {
    let proposed: Vec<LabelDistribution> = (0..g.node_count() as u32)
        .into_par_iter()
        .map(|i| {
            let propagated = propagate_row(g, state, i);
            let inflated = inflate(&propagated, params.inflation);
            cutoff(&inflated, params.cutoff, params.tie_tolerance)
        })
        .collect();
    conditional_update(g, state, proposed, params.update_fraction, params.tie_tolerance)
}

/// The stop criterion's state: how often each numChange value has occurred.
#[derive(Debug, Default)]
pub struct StopTracker {
    counts: HashMap<usize, u32>,
    history: Vec<usize>,
}

impl StopTracker {
    pub fn new() -> StopTracker {
        StopTracker::default()
    }

    /// Records one iteration's numChange and reports whether to stop: either
    /// nothing changed (`num_change == 0`) or this value has now been seen
    /// `stop_frequency` times.
    pub fn record_and_check_stop(&mut self, num_change: usize, stop_frequency: u32) -> bool {
        self.history.push(num_change);
        let count = self.counts.entry(num_change).or_insert(0);
        *count += 1;
        num_change == 0 || *count >= stop_frequency
    }

    /// Every numChange recorded so far, in order.
    pub fn history(&self) -> &[usize] {
        &self.history
    }

    /// How often `num_change` has been recorded.
    pub fn count(&self, num_change: usize) -> u32 {
        self.counts.get(&num_change).copied().unwrap_or(0)
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// 1-based iteration index.
    pub iteration: u32,
    /// Nodes that accepted their update this iteration.
    pub num_change: usize,
    /// Mean support size across nodes; at least 1.
    pub average_labels: f64,
    /// Modularity of the communities extracted from this iteration's state,
    /// measured on the original (unpreprocessed) graph. `None` when the
    /// trace was built without modularity.
    pub modularity: Option<f64>,
}

/// Everything a LabelRank run produces.
#[derive(Debug, Clone)]
pub struct LabelRankResult {
    /// Final per-node label distributions.
    pub distributions: Vec<LabelDistribution>,
    /// Communities extracted from the final state.
    pub partition: Partition,
    /// Per-iteration records; empty unless tracing was requested.
    pub trace: Vec<TraceRow>,
    /// Iterations actually executed.
    pub iterations: u32,
    /// False when the run hit `max_iterations` without the stop criterion
    /// firing.
    pub converged: bool,
}

/// Runs the full LabelRank pipeline on `g`, adding selfloops internally when
/// absent. With `collect_trace`, every iteration appends a [`TraceRow`]
/// whose modularity is computed against the original `g`.
///
/// Deterministic: identical graph and parameters give identical results,
/// independent of worker-thread count.
///
/// # Errors
///
/// [`DynamicsError::InvalidParam`] when `params` is out of range.
pub fn run_labelrank(g: &Graph, params: &Params, collect_trace: bool) -> Result<LabelRankResult, DynamicsError> {
    params.validate()?;
    let preprocessed;
    let work = if g.has_all_selfloops() {
        g
    } else {
        preprocessed = g.add_selfloops();
        &preprocessed
    };
    let mut state = init_distributions(work)?;
    let mut tracker = StopTracker::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    for iteration in 1..=params.max_iterations {
        let (next, num_change) = iterate_once(work, &state, params);
        state = next;
        iterations = iteration;
        if collect_trace {
            let partition = extract_communities(&state, params.tie_tolerance);
            let q = metrics::modularity(g, &partition).expect("partition covers the whole graph");
            trace.push(TraceRow {
                iteration,
                num_change,
                average_labels: average_label_count(&state),
                modularity: Some(q),
            });
        }
        if tracker.record_and_check_stop(num_change, params.stop_frequency) {
            converged = true;
            break;
        }
    }
    let partition = extract_communities(&state, params.tie_tolerance);
    Ok(LabelRankResult { distributions: state, partition, trace, iterations, converged })
}

/// Groups nodes whose highest-probability labels agree: node `i` joins the
/// community keyed by the smallest label in `max_labels(P_i, tol)`, and the
/// resulting groups get canonical (smallest-member) ids. Grouping is purely
/// label-based; no connectivity is required.
pub fn extract_communities(state: &[LabelDistribution], tol: f64) -> Partition {
    let raw: Vec<u32> = state.iter().map(|d| max_labels(d, tol).smallest()).collect();
    Partition::from_assignment(&raw)
}

/// Arithmetic mean of per-node support sizes; 0 for an empty state.
pub fn average_label_count(state: &[LabelDistribution]) -> f64 {
    if state.is_empty() {
        return 0.0;
    }
    let total: usize = state.iter().map(|d| d.support_size()).sum();
    total as f64 / state.len() as f64
}
