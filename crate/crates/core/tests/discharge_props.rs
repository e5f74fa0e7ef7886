mod common;

use common::{arb_graph, c5k3, four_critical, subsets};
use critgraph::discharge::{
    component_satisfaction, happy_threshold, independent_set_edge_bound, initial_charge, is_happy, psi, run_discharge,
    Annotations, ChargeLedger, ChoosabilityCheck, DischargeError, DischargeParams, GraphHooks, Rule,
};
use critgraph::ore::generate_k_ore;
use critgraph::potential::PotentialParams;
use critgraph::rational::{frac, int};
use critgraph::structure::SearchCaps;
use critgraph::{Graph, Rational, VertexSet};
use proptest::prelude::*;

fn eps() -> Rational {
    frac(1, 105)
}

fn discharge(g: &Graph, descending: bool) -> ChargeLedger {
    let params = DischargeParams { stage2_descending: descending, ..DischargeParams::default() };
    run_discharge(g, &params, &GraphHooks::new(g, SearchCaps::default())).unwrap()
}

fn check_ledger(g: &Graph, ledger: &ChargeLedger) {
    assert!(ledger.is_conserved());
    ledger.validate(g).unwrap();
    assert!(ledger.stage2_rounds <= g.n().max(1), "{} rounds on {} vertices", ledger.stage2_rounds, g.n());
    let total = &ledger.stages[0].total;
    assert!(ledger.stages.iter().all(|s| s.charges.iter().sum::<Rational>() == *total));
}

#[test]
fn golden_ledger_is_reproduced_exactly() {
    let g = c5k3();
    let ledger = discharge(&g, false);
    let text = serde_json::to_string_pretty(&ledger).unwrap() + "\n";
    assert_eq!(text, include_str!("golden/c5_join_k3_ledger.json"));
    let back: ChargeLedger = serde_json::from_str(&text).unwrap();
    assert_eq!(back, ledger);
    back.validate(&g).unwrap();
}

#[test]
fn c5_join_k3_components() {
    let g = c5k3();
    let ledger = discharge(&g, false);
    let rep = component_satisfaction(&ledger, &g).unwrap();
    assert_eq!(rep.components.len(), 1);
    let c = &rep.components[0];
    assert_eq!(c.vertices, vec![0, 1, 2, 3, 4]);
    // five vertices at -3 - eps, then 15 transfers of (7 - eps)/5
    assert_eq!(c.sums[0], int(-15) - int(5) * eps());
    assert_eq!(c.sums[6], int(6) - int(8) * eps());
    assert!(!c.satisfied[1] && c.satisfied[2] && c.happy[6]);
    assert!(rep.all_satisfied);
}

#[test]
fn initial_charge_matches_potential() {
    let pp = PotentialParams::k6();
    for g in [Graph::complete(6), c5k3(), Graph::new(3), generate_k_ore(6, 3, 5).unwrap().graph] {
        let ch = initial_charge(&g, 6, &eps());
        assert!(ch.matches_potential(&g, &pp).unwrap(), "{}", g.to_graph6());
    }
    let k6 = initial_charge(&Graph::complete(6), 6, &eps());
    assert_eq!(k6.total, int(-18) - int(6) * eps());
    assert!(initial_charge(&Graph::new(2), 6, &eps()).charges.iter().all(|c| *c == int(-28) - eps()));
}

#[test]
fn complete_graph_keeps_its_charge() {
    let g = Graph::complete(6);
    let ledger = discharge(&g, false);
    check_ledger(&g, &ledger);
    assert!(ledger.transfers.is_empty());
    assert!(ledger.stages.iter().all(|s| s.charges == ledger.stages[0].charges));
}

#[test]
fn star_leaves_receive_psi_8_8() {
    let g = Graph::complete(1).join(&Graph::new(8));
    let ann = Annotations { degrees: Some([vec![8], vec![5; 8]].concat()), ..Annotations::default() };
    let ledger = run_discharge(&g, &DischargeParams::default(), &ann).unwrap();
    let want = frac(3, 2) - eps() / int(8);
    assert_eq!(psi(8, 8, &eps()).unwrap(), want);
    let r1: Vec<_> = ledger.transfers.iter().filter(|t| t.rule == Rule::R1).collect();
    assert_eq!(r1.len(), 8);
    for t in r1 {
        assert_eq!((t.from, &t.amount), (0, &want));
    }
    for v in 1..=8 {
        assert_eq!(ledger.charges(1)[v], int(-3) - eps() + &want);
    }
    assert_eq!(ledger.charges(1)[0], int(0));
    assert!(ledger.is_conserved());
}

#[test]
fn annotations_are_checked_against_the_graph() {
    let g = c5k3();
    assert!(Annotations::default().check(&g).is_ok());
    let short = Annotations { degrees: Some(vec![5; 3]), ..Annotations::default() };
    assert!(matches!(short.check(&g), Err(DischargeError::Input(_))));
    let far = Annotations { downward: vec![[0, 8]], ..Annotations::default() };
    assert!(far.check(&g).is_err());
    let cl = Annotations { clusters: Some(vec![vec![0], vec![9]]), ..Annotations::default() };
    assert!(cl.check(&g).is_err());
}

#[test]
fn psi_table() {
    let e = eps();
    assert_eq!(psi(8, 7, &e).unwrap(), frac(12, 7) - &e / int(7));
    assert_eq!(psi(7, 5, &e).unwrap(), frac(7, 5) - &e / int(5));
    assert_eq!(psi(8, 8, &e).unwrap(), frac(3, 2) - &e / int(8));
    assert!(matches!(psi(8, 0, &e), Err(DischargeError::Input(_))));
}

#[test]
fn psi_monotonicity() {
    let e = eps();
    for d in 6..=20 {
        for r in 1..=d {
            let here = psi(d, r, &e).unwrap();
            if r < d {
                assert!(psi(d, r + 1, &e).unwrap() < here, "decreasing in r at ({d},{r})");
                assert!(psi(d - 1, r, &e).unwrap() < here, "increasing in d at ({d},{r})");
            }
        }
        for i in 0..=5 {
            if d - 1 - i >= 1 {
                assert!(psi(d - 1, d - 1 - i, &e).unwrap() < psi(d, d - i, &e).unwrap(), "psi(d, d-{i}) at d={d}");
            }
        }
    }
}

#[test]
fn happy_boundary_is_exact() {
    let e = eps();
    let t = happy_threshold(&e);
    assert_eq!(t, int(2) + int(2) * &e);
    assert!(is_happy(&t, &e));
    assert!(!is_happy(&(&t - frac(1, 1_000_000)), &e));
}

#[test]
fn unsupported_k_is_rejected() {
    let params = DischargeParams { k: 5, ..DischargeParams::default() };
    let g = Graph::complete(5);
    assert!(matches!(run_discharge(&g, &params, &Annotations::default()), Err(DischargeError::Unsupported(5))));
}

#[test]
fn ore_graphs_conserve_charge() {
    for seed in 1..=60u64 {
        let g = generate_k_ore(6, (seed % 5) as usize, seed).unwrap().graph;
        for desc in [false, true] {
            check_ledger(&g, &discharge(&g, desc));
        }
    }
}

/// With the send-time happiness guard, the stage-2 schedule can decide which
/// member of a two-vertex cluster gets paid; the remainder then leaves
/// through Rule 3A instead. The totals agree; individual charges need not.
#[test]
fn stage2_order_changes_final_charges_on_some_ore_graphs() {
    let mut diverged = Vec::new();
    for seed in 1..=200u64 {
        let g = generate_k_ore(6, (seed % 5) as usize, seed).unwrap().graph;
        let (up, down) = (discharge(&g, false), discharge(&g, true));
        assert_eq!(up.stages[6].total, down.stages[6].total);
        if up.stages[6].charges != down.stages[6].charges {
            diverged.push(seed);
        }
    }
    assert_eq!(diverged.len(), 17, "{diverged:?}");
    assert!(diverged.contains(&29));
}

/// Vertex 3 is the only degree-5 vertex; its neighbours 6 and 7 have
/// degrees 6 and 7. Ascending, 6 pays 2 - eps (Rule 2B) and 7 then pays
/// 7 - eps (Rule 2A). Descending, 7 alone makes 3 happy and 6 is reserved.
#[test]
fn stage2_order_matters_with_a_shared_degree5_neighbour() {
    let edges = [
        (0, 8),
        (1, 3),
        (1, 7),
        (2, 3),
        (2, 6),
        (2, 7),
        (2, 8),
        (3, 4),
        (3, 6),
        (3, 7),
        (4, 6),
        (4, 7),
        (5, 6),
        (5, 7),
        (6, 7),
        (6, 8),
        (7, 8),
    ];
    let g = Graph::from_edges(9, &edges).unwrap();
    let e = eps();
    let (up, down) = (discharge(&g, false), discharge(&g, true));
    check_ledger(&g, &up);
    check_ledger(&g, &down);
    assert_eq!(up.charges(6)[3], int(6) - int(3) * &e);
    assert_eq!(up.charges(6)[6], int(0));
    assert!(up.reserved.is_empty());
    assert_eq!(down.charges(6)[3], int(4) - int(2) * &e);
    assert_eq!(down.charges(6)[6], int(2) - &e);
    assert_eq!(down.reserved, vec![6]);
}

#[test]
fn stage2_order_is_irrelevant_on_fixed_instances() {
    let star = Graph::complete(1).join(&Graph::new(8));
    for g in [Graph::complete(6), c5k3(), star, Graph::cycle(7).join(&Graph::complete(2))] {
        assert_eq!(discharge(&g, false).stages, discharge(&g, true).stages, "{}", g.to_graph6());
    }
}

#[test]
fn independent_sets_in_four_critical_graphs_meet_edge_bound() {
    let mut seen = 0;
    for g in four_critical() {
        let low: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) == 3).collect();
        for size in 0..=low.len() {
            subsets(&low, size, &mut |s| {
                let a = VertexSet::from_slice(s);
                if !g.is_independent(&a) {
                    return;
                }
                for l in 1..=3 {
                    let rep = independent_set_edge_bound(g, 4, &a, l).unwrap();
                    assert!(rep.degree_k_holds && rep.holds, "{} A={s:?} l={l}: {rep:?}", g.to_graph6());
                    assert!(rep.choosability.is_none());
                }
                seen += 1;
            });
        }
    }
    assert!(seen > 20);
}

#[test]
fn edge_bound_violation_has_choosable_witness() {
    // K_{4,3}: A = the four degree-3 vertices, B = the three of degree 4.
    let g = Graph::new(4).join(&Graph::new(3));
    let a: VertexSet = (0..4).collect();
    let rep = independent_set_edge_bound(&g, 4, &a, 1).unwrap();
    assert_eq!((rep.degree_k_edges, rep.degree_k_bound), (12, 10));
    assert!(!rep.degree_k_holds);
    assert!(matches!(rep.choosability, Some(ChoosabilityCheck::Witness { .. })), "{rep:?}");
}

#[test]
fn edge_bound_input_checks() {
    let g = c5k3();
    let empty = independent_set_edge_bound(&g, 6, &VertexSet::new(), 2).unwrap();
    assert_eq!((empty.edges, empty.bound, empty.holds), (0, 0, true));
    assert!(independent_set_edge_bound(&g, 6, &VertexSet::from_slice(&[0, 1]), 2).is_err());
    assert!(independent_set_edge_bound(&g, 6, &VertexSet::from_slice(&[5]), 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_graphs_conserve_charge(g in arb_graph(20)) {
        let up = discharge(&g, false);
        check_ledger(&g, &up);
        let rep = component_satisfaction(&up, &g).unwrap();
        for c in &rep.components {
            for (i, s) in c.sums.iter().enumerate() {
                let direct: Rational = c.vertices.iter().map(|&v| up.charges(i)[v].clone()).sum();
                prop_assert_eq!(s, &direct);
            }
        }
    }

    #[test]
    fn random_graphs_with_annotations_conserve_charge(g in arb_graph(16), pick in any::<u64>()) {
        // force a few vertices to degree 5 to exercise the synthetic path
        let degrees: Vec<usize> = (0..g.n()).map(|v| if pick >> (v % 64) & 1 == 1 { 5 } else { g.degree(v) }).collect();
        let ann = Annotations { degrees: Some(degrees), ..Annotations::default() };
        let ledger = run_discharge(&g, &DischargeParams::default(), &ann).unwrap();
        prop_assert!(ledger.is_conserved());
        prop_assert!(ledger.stage2_rounds <= g.n());
    }
}
