mod common;

use common::{arb_graph, brute_chromatic, four_critical};
use critgraph::coloring::{
    bad_list_assignment, chromatic_number, extract_critical_subgraph, is_colorable, is_critical, is_f_choosable,
    is_proper_coloring, CHOOSABILITY_CAP,
};
use critgraph::Graph;
use proptest::prelude::*;

/// Criticality straight from the definition: chromatic number `k`, and
/// deleting any edge or any vertex drops it.
fn critical_by_definition(g: &Graph, k: usize) -> bool {
    if g.n() == 0 || brute_chromatic(g) != k || g.min_degree() == 0 {
        return false;
    }
    g.edges().iter().all(|&(u, v)| brute_chromatic(&g.without_edge(u, v)) < k)
}

#[test]
fn small_four_critical_counts() {
    let counts: Vec<usize> = (4..=8).map(|n| four_critical().iter().filter(|g| g.n() == n).count()).collect();
    assert_eq!(counts, vec![1, 0, 1, 2, 5]);
    assert!(four_critical().iter().all(|g| chromatic_number(g) == 4));
}

#[test]
fn choosability_of_classic_graphs() {
    // Even cycles are 2-choosable, odd cycles are not; K_{2,4} is not.
    assert!(is_f_choosable(&Graph::cycle(6), &[2; 6], CHOOSABILITY_CAP).unwrap());
    assert!(!is_f_choosable(&Graph::cycle(5), &[2; 5], CHOOSABILITY_CAP).unwrap());
    let k24 = Graph::new(2).join(&Graph::new(4));
    let bad = bad_list_assignment(&k24, &[2; 6], CHOOSABILITY_CAP).unwrap().expect("K_{2,4} is not 2-choosable");
    assert!(bad.iter().all(|l| l.len() == 2));
    // Degree lists always suffice on a tree.
    let p = Graph::path(5);
    let f: Vec<usize> = (0..5).map(|v| p.degree(v) + 1).collect();
    assert!(is_f_choosable(&p, &f, CHOOSABILITY_CAP).unwrap());
}

proptest! {
    #[test]
    fn chromatic_number_matches_brute_force(g in arb_graph(7)) {
        prop_assert_eq!(chromatic_number(&g), brute_chromatic(&g));
    }

    #[test]
    fn witnesses_are_proper(g in arb_graph(12), c in 1usize..5) {
        if let Some(col) = is_colorable(&g, c) {
            prop_assert!(is_proper_coloring(&g, &col, c));
        } else {
            prop_assert!(chromatic_number(&g) > c);
        }
    }

    #[test]
    fn criticality_matches_definition(g in arb_graph(7), k in 2usize..5) {
        prop_assert_eq!(is_critical(&g, k), critical_by_definition(&g, k));
    }

    #[test]
    fn extracted_subgraph_is_critical(g in arb_graph(9)) {
        let k = chromatic_number(&g);
        prop_assume!(k >= 2);
        let sub = extract_critical_subgraph(&g, k).unwrap();
        prop_assert!(is_critical(&sub.graph, k));
        for (u, v) in sub.host_edges() {
            prop_assert!(g.has_edge(u, v));
        }
    }
}
