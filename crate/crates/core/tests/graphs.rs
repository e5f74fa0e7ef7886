mod common;

use common::arb_graph;
use critgraph::canon::{are_isomorphic, canonical_form};
use critgraph::Graph;
use proptest::prelude::*;

#[test]
fn graph6_known_strings() {
    // nauty's encodings of K4, the 5-cycle and the empty graph on 3 vertices.
    assert_eq!(Graph::complete(4).to_graph6(), "C~");
    assert_eq!(Graph::cycle(5).to_graph6(), "Dhc");
    assert_eq!(Graph::new(3).to_graph6(), "B?");
    assert_eq!(Graph::from_graph6("C~").unwrap(), Graph::complete(4));
}

proptest! {
    #[test]
    fn graph6_round_trips(g in arb_graph(40)) {
        let s = g.to_graph6();
        prop_assert_eq!(Graph::from_graph6(&s).unwrap(), g.clone());
        prop_assert_eq!(Graph::from_graph6(&s).unwrap().to_graph6(), s);
    }

    #[test]
    fn adjacency_json_round_trips(g in arb_graph(20)) {
        prop_assert_eq!(Graph::from_adjacency_json(&g.to_adjacency_json()).unwrap(), g);
    }

    #[test]
    fn canonical_form_ignores_labels(g in arb_graph(10), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let h = g.permute(&perm);
        prop_assert_eq!(canonical_form(&g), canonical_form(&h));
        prop_assert!(are_isomorphic(&g, &h));
    }

    #[test]
    fn complement_is_an_involution(g in arb_graph(16)) {
        let n = g.n();
        prop_assert_eq!(g.complement().complement(), g.clone());
        prop_assert_eq!(g.edge_count() + g.complement().edge_count(), n * (n - 1) / 2);
    }
}
