//! Partition quality measurement: Newman modularity and partition agreement.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::Graph;

/// Errors from partition metrics.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    NodeCountMismatch { partition: usize, graph: usize },
}

/// A disjoint assignment of every node to exactly one community.
///
/// Community ids are canonical: each community is identified by its smallest
/// member's node id. Two partitions that group nodes the same way therefore
/// have equal assignment vectors, no matter how the groups were labeled
/// before construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u32>,
}

impl Partition {
    /// Builds a partition from any per-node labeling, renaming each group to
    /// its smallest member id.
    pub fn from_assignment(raw: &[u32]) -> Partition {
        let mut canonical: BTreeMap<u32, u32> = BTreeMap::new();
        for (node, &label) in raw.iter().enumerate() {
            canonical.entry(label).or_insert(node as u32);
        }
        Partition { assignment: raw.iter().map(|label| canonical[label]).collect() }
    }

    /// Canonical community id per node.
    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Number of nodes covered.
    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// Number of distinct communities.
    pub fn community_count(&self) -> usize {
        self.assignment.iter().collect::<std::collections::BTreeSet<_>>().len()
    }

    /// Communities as `canonical id -> sorted member list`.
    pub fn communities(&self) -> BTreeMap<u32, Vec<u32>> {
        let mut map: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (node, &community) in self.assignment.iter().enumerate() {
            map.entry(community).or_default().push(node as u32);
        }
        map
    }
}

/// Newman modularity `Q = sum_c [ e_c/m - (d_c/2m)^2 ]`, where `e_c` counts
/// intra-community edges, `d_c` sums member degrees, and `m` is the edge
/// count.
///
/// Q is meant to be computed on the original input graph; the selfloops that
/// LabelRank preprocessing adds would shift every term. Should the input
/// itself contain selfloops, they count once in `m` and `e_c` and contribute
/// 2 to their node's degree, which keeps the single-community partition at
/// exactly Q = 0. A graph with no edges gets Q = 0 by convention; callers
/// that want to warn about that degenerate case can test `edge_count() == 0`
/// themselves.
///
/// # Errors
///
/// [`MetricsError::NodeCountMismatch`] when the partition does not cover
/// exactly the graph's nodes.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64, MetricsError> {
    if p.node_count() != g.node_count() {
        return Err(MetricsError::NodeCountMismatch { partition: p.node_count(), graph: g.node_count() });
    }
    let m = g.edge_count();
    if m == 0 {
        return Ok(0.0);
    }

    let mut per_community: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for i in 0..g.node_count() as u32 {
        let community = p.assignment[i as usize];
        let degree = g.degree(i) as u64 + u64::from(g.has_selfloop(i));
        let mut intra = 0;
        for &j in g.neighbors(i) {
            if j >= i && p.assignment[j as usize] == community {
                intra += 1;
            }
        }
        let entry = per_community.entry(community).or_insert((0, 0));
        entry.0 += intra;
        entry.1 += degree;
    }

    let m = m as f64;
    let mut q = 0.0;
    for (intra, degree_sum) in per_community.values() {
        let fraction = *intra as f64 / m;
        let expected = *degree_sum as f64 / (2.0 * m);
        q += fraction - expected * expected;
    }
    Ok(q)
}

/// Result of [`compare_partitions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionComparison {
    /// True when both partitions group the nodes identically.
    pub identical: bool,
    /// Fraction of node pairs classified consistently (placed together in
    /// both partitions or apart in both); the Rand index.
    pub agreement: f64,
}

/// Compares two partitions of the same node set. Symmetric in its arguments.
/// With fewer than two nodes there are no pairs to classify and agreement
/// is 1.
///
/// # Errors
///
/// [`MetricsError::NodeCountMismatch`] when the node counts differ.
pub fn compare_partitions(p1: &Partition, p2: &Partition) -> Result<PartitionComparison, MetricsError> {
    if p1.node_count() != p2.node_count() {
        return Err(MetricsError::NodeCountMismatch { partition: p2.node_count(), graph: p1.node_count() });
    }
    let n = p1.node_count() as u64;
    let identical = p1.assignment == p2.assignment;
    if n < 2 {
        return Ok(PartitionComparison { identical, agreement: 1.0 });
    }

    let choose2 = |x: u64| x * (x.saturating_sub(1)) / 2;
    let mut cells: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut rows: BTreeMap<u32, u64> = BTreeMap::new();
    let mut cols: BTreeMap<u32, u64> = BTreeMap::new();
    for (&a, &b) in p1.assignment.iter().zip(&p2.assignment) {
        *cells.entry((a, b)).or_insert(0) += 1;
        *rows.entry(a).or_insert(0) += 1;
        *cols.entry(b).or_insert(0) += 1;
    }
    let together_both: u64 = cells.values().map(|&x| choose2(x)).sum();
    let together_1: u64 = rows.values().map(|&x| choose2(x)).sum();
    let together_2: u64 = cols.values().map(|&x| choose2(x)).sum();
    let total = choose2(n);
    // Inclusion-exclusion gives total - together_1 - together_2
    // + together_both; grouped so the unsigned intermediate never dips
    // below zero (it would when both partitions have large blocks).
    let apart_both = (total + together_both) - (together_1 + together_2);
    Ok(PartitionComparison {
        identical,
        agreement: (together_both + apart_both) as f64 / total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)])
    }

    #[test]
    fn canonical_ids_are_smallest_members() {
        let p = Partition::from_assignment(&[7, 7, 9, 9, 7]);
        assert_eq!(p.assignment(), &[0, 0, 2, 2, 0]);
        assert_eq!(p.community_count(), 2);
        let communities = p.communities();
        assert_eq!(communities[&0], vec![0, 1, 4]);
        assert_eq!(communities[&2], vec![2, 3]);
    }

    #[test]
    fn single_community_has_zero_modularity() {
        let g = triangle();
        let p = Partition::from_assignment(&[0, 0, 0]);
        assert!(modularity(&g, &p).unwrap().abs() <= 1e-12);
        // Same with a selfloop present.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2), (1, 1)]);
        assert!(modularity(&g, &p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn triangle_singletons_score_minus_one_third() {
        let q = modularity(&triangle(), &Partition::from_assignment(&[0, 1, 2])).unwrap();
        assert!((q - (-1.0 / 3.0)).abs() <= 1e-12, "q = {q}");
    }

    #[test]
    fn karate_faction_split_scores_point_37() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/karate.txt");
        let file = std::fs::File::open(path).unwrap();
        let g = Graph::load_edge_list(std::io::BufReader::new(file), &crate::graph::LoadOptions::default()).unwrap();
        let truth_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/karate_truth.txt");
        let text = std::fs::read_to_string(truth_path).unwrap();
        let mut raw = vec![0u32; g.node_count()];
        for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            let mut it = line.split_whitespace();
            let node = g.node_by_name(it.next().unwrap()).unwrap();
            raw[node as usize] = it.next().unwrap().parse().unwrap();
        }
        let q = modularity(&g, &Partition::from_assignment(&raw)).unwrap();
        assert!((q - 0.37).abs() <= 0.01, "q = {q}");
    }

    #[test]
    fn modularity_requires_full_coverage() {
        let err = modularity(&triangle(), &Partition::from_assignment(&[0, 0])).unwrap_err();
        assert!(matches!(err, MetricsError::NodeCountMismatch { partition: 2, graph: 3 }));
    }

    #[test]
    fn edgeless_graph_gets_zero() {
        let g = Graph::from_edges(3, &[]);
        assert_eq!(modularity(&g, &Partition::from_assignment(&[0, 1, 2])).unwrap(), 0.0);
    }

    #[test]
    fn modularity_ignores_community_labels() {
        let g = triangle();
        let q1 = modularity(&g, &Partition::from_assignment(&[5, 5, 9])).unwrap();
        let q2 = modularity(&g, &Partition::from_assignment(&[1, 1, 0])).unwrap();
        assert_eq!(q1, q2);
    }

    #[test]
    fn comparison_of_partition_with_itself() {
        let p = Partition::from_assignment(&[0, 0, 1, 1]);
        let c = compare_partitions(&p, &p).unwrap();
        assert!(c.identical);
        assert_eq!(c.agreement, 1.0);
    }

    #[test]
    fn comparison_of_two_one_block_partitions_stays_in_range() {
        // Both sides place every pair together, which drives the
        // inclusion-exclusion terms to their extremes.
        let p = Partition::from_assignment(&[0, 0, 0, 0, 0]);
        let c = compare_partitions(&p, &p).unwrap();
        assert!(c.identical);
        assert_eq!(c.agreement, 1.0);
    }

    #[test]
    fn singletons_vs_one_block_agree_nowhere() {
        let p1 = Partition::from_assignment(&[0, 1, 2, 3]);
        let p2 = Partition::from_assignment(&[0, 0, 0, 0]);
        let c = compare_partitions(&p1, &p2).unwrap();
        assert!(!c.identical);
        assert_eq!(c.agreement, 0.0);
    }

    #[test]
    fn relabeled_partitions_are_identical() {
        let p1 = Partition::from_assignment(&[3, 3, 8, 8, 8]);
        let p2 = Partition::from_assignment(&[1, 1, 0, 0, 0]);
        let c = compare_partitions(&p1, &p2).unwrap();
        assert!(c.identical);
        assert_eq!(c.agreement, 1.0);
    }

    #[test]
    fn comparison_is_symmetric() {
        let p1 = Partition::from_assignment(&[0, 0, 1, 2, 2, 1]);
        let p2 = Partition::from_assignment(&[0, 1, 1, 2, 2, 2]);
        let a = compare_partitions(&p1, &p2).unwrap();
        let b = compare_partitions(&p2, &p1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn comparison_rejects_node_set_mismatch() {
        let p1 = Partition::from_assignment(&[0, 0]);
        let p2 = Partition::from_assignment(&[0, 0, 0]);
        assert!(compare_partitions(&p1, &p2).is_err());
    }
}
