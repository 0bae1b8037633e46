//! Randomized invariant checks over the graph, operator, and metric
//! layers.

use std::collections::{BTreeSet, HashMap};

use labelrank::dynamics::{
    cutoff, inflate, init_distributions, iterate_once, propagate, run_labelrank,
    LabelDistribution, Params, StopTracker,
};
use labelrank::graph::LoadOptions;
use labelrank::metrics::{compare_partitions, modularity, Partition};
use labelrank::synthetic::gnm_random_graph;
use labelrank::Graph;
use proptest::collection::vec;
use proptest::prelude::*;

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (2..max_nodes).prop_flat_map(|n| {
        vec((0..n as u32, 0..n as u32), 1..(3 * n))
            .prop_map(move |edges| Graph::from_edges(n, &edges))
    })
}

fn distribution_strategy() -> impl Strategy<Value = LabelDistribution> {
    vec((0u32..50, 1e-6f64..1.0), 1..12).prop_map(LabelDistribution::from_weights)
}

/// Edges of `g` as unordered name pairs, normalized lexicographically so
/// that graphs with different internal numbering compare equal.
fn named_edges(g: &Graph) -> BTreeSet<(String, String)> {
    let mut edges = BTreeSet::new();
    for i in 0..g.node_count() as u32 {
        for &j in g.neighbors(i) {
            if j >= i {
                let a = g.node_name(i).into_owned();
                let b = g.node_name(j).into_owned();
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                edges.insert((a, b));
            }
        }
    }
    edges
}

proptest! {
    #[test]
    fn edge_lists_round_trip_through_write_and_load(graph in graph_strategy(25)) {
        let mut buffer = Vec::new();
        graph.write_edge_list(&mut buffer).unwrap();
        let reloaded = Graph::load_edge_list(&buffer[..], &LoadOptions::default()).unwrap();
        prop_assert_eq!(reloaded.edge_count(), graph.edge_count());
        prop_assert_eq!(named_edges(&reloaded), named_edges(&graph));
    }

    #[test]
    fn selfloop_preprocessing_is_idempotent(graph in graph_strategy(25)) {
        let once = graph.add_selfloops();
        let twice = once.add_selfloops();
        prop_assert!(once.has_all_selfloops());
        prop_assert_eq!(&once, &twice);
    }

    #[test]
    fn inflate_keeps_normalization_and_order(
        d in distribution_strategy(),
        inflation in 1.0f64..6.0,
    ) {
        let inflated = inflate(&d, inflation);
        let total: f64 = inflated.entries().iter().map(|&(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for &(a, pa) in d.entries() {
            for &(b, pb) in d.entries() {
                if pa > pb {
                    prop_assert!(inflated.probability(a) >= inflated.probability(b));
                }
            }
        }
    }

    #[test]
    fn cutoff_shrinks_support_and_renormalizes(
        d in distribution_strategy(),
        r in 0.0f64..0.9,
    ) {
        let trimmed = cutoff(&d, r, 1e-9);
        prop_assert!(trimmed.support_size() >= 1);
        prop_assert!(trimmed.support_size() <= d.support_size());
        let total: f64 = trimmed.entries().iter().map(|&(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for &(label, _) in trimmed.entries() {
            prop_assert!(d.probability(label) > 0.0);
        }
    }

    #[test]
    fn compare_partitions_is_symmetric_and_bounded(
        (a, b) in (2usize..30).prop_flat_map(|n| {
            (vec(0u32..5, n), vec(0u32..5, n))
        }),
    ) {
        let p1 = Partition::from_assignment(&a);
        let p2 = Partition::from_assignment(&b);
        let forward = compare_partitions(&p1, &p2).unwrap();
        let backward = compare_partitions(&p2, &p1).unwrap();
        prop_assert_eq!(forward, backward);
        prop_assert!((0.0..=1.0).contains(&forward.agreement));
        let with_self = compare_partitions(&p1, &p1).unwrap();
        prop_assert!(with_self.identical);
        prop_assert_eq!(with_self.agreement, 1.0);
    }

    #[test]
    fn modularity_ignores_community_labels(
        (graph, assignment, permutation) in graph_strategy(20).prop_flat_map(|g| {
            let n = g.node_count();
            let relabel = Just((0u32..6).collect::<Vec<_>>()).prop_shuffle();
            (Just(g), vec(0u32..6, n), relabel)
        }),
    ) {
        let direct = Partition::from_assignment(&assignment);
        let relabeled: Vec<u32> = assignment
            .iter()
            .map(|&c| permutation[c as usize])
            .collect();
        let renamed = Partition::from_assignment(&relabeled);
        let q1 = modularity(&graph, &direct).unwrap();
        let q2 = modularity(&graph, &renamed).unwrap();
        prop_assert!((q1 - q2).abs() <= 1e-12);
        prop_assert!(q1.abs() <= 1.0);
    }

    #[test]
    fn stop_tracker_matches_a_counting_model(
        values in vec(0usize..6, 1..40),
        freq in 1u32..5,
    ) {
        let mut tracker = StopTracker::new();
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for &value in &values {
            *counts.entry(value).or_insert(0) += 1;
            let expected = value == 0 || counts[&value] >= freq;
            prop_assert_eq!(tracker.record_and_check_stop(value, freq), expected);
            if expected {
                break;
            }
        }
    }

    #[test]
    fn random_graphs_are_reproducible(n in 2usize..40, seed in 0u64..1000) {
        let m = n / 2;
        let first = gnm_random_graph(n, m, seed);
        let second = gnm_random_graph(n, m, seed);
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(first.node_count(), n);
        prop_assert_eq!(first.edge_count(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagation_keeps_every_row_normalized(
        graph in graph_strategy(20),
        steps in 0usize..3,
    ) {
        let g = graph.add_selfloops();
        let mut state = init_distributions(&g).unwrap();
        let params = Params::default();
        for _ in 0..steps {
            state = iterate_once(&g, &state, &params).0;
        }
        let next = propagate(&g, &state);
        for d in &next {
            let total: f64 = d.entries().iter().map(|&(_, p)| p).sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            prop_assert!(d.support_size() >= 1);
        }
    }

    #[test]
    fn full_runs_are_reproducible_and_cover_every_node(graph in graph_strategy(20)) {
        let params = Params::default();
        let first = run_labelrank(&graph, &params, false).unwrap();
        let second = run_labelrank(&graph, &params, false).unwrap();
        prop_assert_eq!(
            first.partition.assignment(),
            second.partition.assignment()
        );
        prop_assert_eq!(first.partition.node_count(), graph.node_count());
        prop_assert!(first.partition.community_count() >= 1);
    }
}
