//! Seeded random graph generation for benchmarks and tests.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// Generates a simple undirected G(n, m) graph: `m` distinct non-loop edges
/// drawn uniformly at random from a ChaCha8 generator. Identical arguments
/// give identical graphs. Edges are drawn by rejection, so this is meant for
/// sparse graphs (`m` well below the `n*(n-1)/2` maximum); isolated nodes
/// can occur and are kept.
///
/// # Panics
///
/// If `m` exceeds the number of distinct node pairs.
pub fn gnm_random_graph(n: usize, m: usize, seed: u64) -> Graph {
    let max_edges = n.saturating_mul(n.saturating_sub(1)) / 2;
    assert!(m <= max_edges, "cannot place {m} distinct edges on {n} nodes (max {max_edges})");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(m * 2);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m);
    while edges.len() < m {
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a == b {
            continue;
        }
        let edge = (a.min(b), a.max(b));
        if seen.insert(edge) {
            edges.push(edge);
        }
    }
    Graph::from_edges(n, &edges)
}
