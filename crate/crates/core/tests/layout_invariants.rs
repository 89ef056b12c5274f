mod common;

use std::time::Instant;

use forge_core::layout::LayoutConfig;
use proptest::prelude::*;

#[test]
fn hundred_random_graphs_keep_every_invariant() {
    let cfg = LayoutConfig::default();
    let start = Instant::now();
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let g = common::build_graph(1 + (seed as usize * 37) % 60, seed);
        for v in common::layout_violations(&g, &cfg) {
            failures.push(format!("seed {seed}: {v}"));
        }
    }
    let elapsed = start.elapsed();
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
}

#[test]
fn large_graph_is_fast() {
    let g = common::build_graph(200, 7);
    let start = Instant::now();
    forge_core::layout::layout(&g, &LayoutConfig::default());
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn pair_counter_agrees_on_known_cases() {
    let l = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let e = |v: &[(&str, &str)]| v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>();
    let layers = vec![l(&["a", "b", "c"]), l(&["x", "y", "z"])];
    let edges = e(&[("a", "z"), ("b", "y"), ("c", "x")]);
    assert_eq!(common::pair_crossings(&layers, &edges), 3);
    assert_eq!(forge_core::layout::count_crossings(&layers, &edges), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graphs(g in common::diagram_graph(60)) {
        let v = common::layout_violations(&g, &LayoutConfig::default());
        prop_assert!(v.is_empty(), "{:#?}", v);
    }

    #[test]
    fn cycle_breaking_yields_a_dag(n in 2usize..20, raw in prop::collection::vec((0usize..20, 0usize..20), 0..60)) {
        let names: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
        let nodes: Vec<&str> = names.iter().map(String::as_str).collect();
        let edges: Vec<(&str, &str)> =
            raw.iter().filter(|(a, b)| a % n != b % n).map(|(a, b)| (nodes[a % n], nodes[b % n])).collect();
        let (dag, _) = forge_core::layout::break_cycles(&nodes, &edges);
        prop_assert!(common::toposort_ok(&nodes, &dag));
    }

    #[test]
    fn bipartite_crossings_never_grow(
        top in 1usize..8,
        bottom in 1usize..8,
        raw in prop::collection::vec((0usize..8, 0usize..8), 0..20),
        sweeps in 1usize..6,
    ) {
        let a: Vec<String> = (0..top).map(|i| format!("a{i}")).collect();
        let b: Vec<String> = (0..bottom).map(|i| format!("b{i}")).collect();
        let edges: Vec<(String, String)> =
            raw.iter().map(|(x, y)| (a[x % top].clone(), b[y % bottom].clone())).collect();
        let layers = vec![a.clone(), b.clone()];
        let before = common::pair_crossings(&layers, &edges);
        let after = forge_core::layout::minimize_crossings(layers, &edges, sweeps);
        prop_assert!(common::pair_crossings(&after, &edges) <= before);
    }
}
