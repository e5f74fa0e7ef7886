//! One line per acceptance criterion. Runs without the libtest harness so
//! the verdicts land in the plain test output.

mod common;

use common::{c5k3, four_critical, k6k6, naive_clique_weight, subsets};
use critgraph::canon::all_graphs;
use critgraph::cliques::cliques_of_size;
use critgraph::discharge::{independent_set_edge_bound, psi, run_discharge, Annotations, DischargeParams, GraphHooks};
use critgraph::extension::{
    all_extensions, check_edge_addition_potential, find_i_edge_addition, is_i_collapsible, Collapsibility,
    EdgeAdditionOutcome, ExtensionCaps, ExtensionOutcome,
};
use critgraph::ore::{generate_k_ore, recognize_k_ore, RECOGNITION_BUDGET};
use critgraph::potential::{
    check_density_theorems, clique_weight, ky_potential, potential, ClaimStatus, PotentialParams,
};
use critgraph::rational::{frac, int};
use critgraph::structure::{clone_vertex, find_gems, SearchCaps};
use critgraph::{Graph, Rational, VertexSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn eps() -> Rational {
    frac(1, 105)
}

fn ore_corpus() -> Vec<(u64, Graph)> {
    (1..=200u64).map(|s| (s, generate_k_ore(6, (s % 5) as usize, s).unwrap().graph)).collect()
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.gen_range(1..=max_n);
    let p: f64 = rng.gen_range(0.1..0.9);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

fn k6_potential() -> Outcome {
    let p = potential(&Graph::complete(6), &PotentialParams::k6()).map_err(|e| e.to_string())?;
    ensure!(p == frac(268, 15), "p(K6) = {p}");
    ensure!(p == int(18) + int(6) * eps() - int(2) * frac(10, 105), "p(K6) = {p}");
    Ok(format!("p(K6) = {p}"))
}

fn assumption_one() -> Outcome {
    let pp = PotentialParams::k6();
    pp.validate().map_err(|e| e.to_string())?;
    let d = &pp.delta;
    ensure!(&pp.gamma - int(2) + &pp.q + int(6) * d == pp.p, "(Gamma-2)+Q+6delta != P");
    ensure!(&pp.p + &pp.q + int(3) * d == pp.big_delta, "P+Q+3delta != Delta");
    ensure!(&pp.big_delta + int(5) * d == int(2), "Delta+5delta != 2");
    Ok("all clauses valid, three at equality".into())
}

fn ky_equality() -> Outcome {
    let pp = PotentialParams::k6();
    for (seed, g) in ore_corpus() {
        ensure!(ky_potential(&g, 6) == 18, "seed {seed}: p_bar = {}", ky_potential(&g, 6));
        if g.n() > 6 {
            let n = int(g.n() as i64);
            let bound = int(18) + &n * eps() - (int(2) + (&n - int(1)) / int(5)) * &pp.delta;
            let p = potential(&g, &pp).map_err(|e| e.to_string())?;
            ensure!(p <= bound, "seed {seed}: p = {p} > {bound}");
        }
        let rep = check_density_theorems(&g, &pp).map_err(|e| e.to_string())?;
        ensure!(rep.critical && rep.k_ore == Some(true), "seed {seed}: not certified 6-critical 6-Ore");
        let bad: Vec<&str> = rep.failures().map(|c| c.name.as_str()).collect();
        ensure!(bad.is_empty(), "seed {seed}: {bad:?} fail");
    }
    let g = k6k6();
    let n = int(11);
    let bound = int(18) + &n * eps() - (int(2) + (&n - int(1)) / int(5)) * &pp.delta;
    ensure!(potential(&g, &pp).unwrap() == bound, "K6 o K6 misses equality");
    Ok("200 graphs at p_bar = 18; K6 o K6 attains the bound".into())
}

fn t_bound() -> Outcome {
    for (seed, g) in ore_corpus() {
        let t = clique_weight(&g, 6).map_err(|e| e.to_string())?.value;
        ensure!(g.n() == 6 || 5 * t as usize >= 10 + g.n() - 1, "seed {seed}: T = {t} on {} vertices", g.n());
    }
    let mut compared = 0;
    for n in 1..=6 {
        for g in all_graphs(n, 0) {
            for k in 3..=6 {
                let t = clique_weight(&g, k).unwrap().value;
                ensure!(t == naive_clique_weight(&g, k), "{} k={k}", g.to_graph6());
                compared += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let g = random_graph(&mut rng, 10);
        for k in 3..=6 {
            ensure!(clique_weight(&g, k).unwrap().value == naive_clique_weight(&g, k), "{} k={k}", g.to_graph6());
            compared += 1;
        }
    }
    Ok(format!("bound on 199 non-K6 graphs; {compared} oracle comparisons"))
}

fn gems() -> Outcome {
    for (seed, g) in ore_corpus().into_iter().take(50) {
        let gems = find_gems(&g, 6);
        for v in 0..g.n() {
            ensure!(gems.iter().any(|gm| !gm.vertices.contains(&v)), "seed {seed}: every gem meets {v}");
        }
    }
    let mut k5s = 0;
    for (seed, g) in ore_corpus().into_iter().take(20) {
        let gems = find_gems(&g, 6);
        for d in cliques_of_size(&g, 5) {
            let ok = gems.iter().any(|gm| gm.vertices.iter().all(|&v| !d.contains(v)));
            ensure!(ok || g == Graph::complete(6), "seed {seed}: no gem misses {:?}", d.to_vec());
            k5s += 1;
        }
    }
    Ok(format!("50 graphs, all vertices; {k5s} K5s in 20 graphs"))
}

fn strong_ky() -> Outcome {
    let counts: Vec<usize> = (4..=8).map(|n| four_critical().iter().filter(|g| g.n() == n).count()).collect();
    ensure!(counts == vec![1, 0, 1, 2, 5], "4-critical counts {counts:?}");
    for g in four_critical() {
        let ore = recognize_k_ore(g, 4, RECOGNITION_BUDGET).unwrap().is_k_ore();
        ensure!(ore.is_some(), "recognizer budget on {}", g.to_graph6());
        if ore != Some(true) {
            ensure!(6 * g.edge_count() + 2 >= 10 * g.n(), "{} too sparse", g.to_graph6());
        }
    }
    let g = c5k3();
    ensure!(ky_potential(&g, 6) == -6, "p_bar(C5 join K3) = {}", ky_potential(&g, 6));
    ensure!(10 * g.edge_count() + 8 >= 28 * g.n(), "C5 join K3 too sparse");
    Ok(format!("{} graphs; C5 join K3 at p_bar = -6", four_critical().len()))
}

fn collapsibility() -> Outcome {
    let caps = ExtensionCaps::default();
    let g = k6k6();
    let r: VertexSet = (0..6).collect();
    let outs = all_extensions(&g, &r, 6, caps).map_err(|e| e.to_string())?.ok_or("colouring cap")?;
    for o in &outs {
        let ExtensionOutcome::Extension(rec) = o else { return Err("missing extension".into()) };
        ensure!(rec.spanning && rec.is_complete() && rec.core.len() == 1, "extension {rec:?}");
    }
    ensure!(is_i_collapsible(&g, &r, 0, 6, caps).unwrap() == Collapsibility::Collapsible, "edge side not collapsible");
    let h = c5k3();
    let k5 = VertexSet::from_slice(&[0, 1, 5, 6, 7]);
    let v = is_i_collapsible(&h, &k5, 0, 6, caps).unwrap();
    ensure!(matches!(v, Collapsibility::NotCollapsible { .. }), "K5 in C5 join K3: {v:?}");
    Ok(format!("{} extensions on K6 o K6; C5 join K3 not collapsible", outs.len()))
}

fn edge_additions() -> Outcome {
    let caps = ExtensionCaps::default();
    let pp = PotentialParams::k6();
    let g = k6k6();
    let EdgeAdditionOutcome::Found(w) = find_i_edge_addition(&g, 1, 6, caps).unwrap() else {
        return Err("no witness on K6 o K6".into());
    };
    ensure!(w.added == vec![[0, 1]] && w.vertices == vec![0, 1, 2, 3, 4, 5] && w.edges.len() == 15, "witness {w:?}");
    for c in check_edge_addition_potential(&g, &w, &pp).unwrap() {
        ensure!(c.status != ClaimStatus::Fail, "{} fails", c.name);
    }
    ensure!(
        find_i_edge_addition(&Graph::complete(6), 1, 6, caps).unwrap() == EdgeAdditionOutcome::NotFound,
        "K6 has a witness"
    );
    Ok("overlap pair on K6 o K6, none on K6".into())
}

fn conservation() -> Outcome {
    let mut corpus: Vec<Graph> = vec![Graph::complete(6), k6k6(), c5k3()];
    corpus.extend(ore_corpus().into_iter().map(|(_, g)| g));
    corpus.extend(four_critical().iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    corpus.extend((0..100).map(|_| random_graph(&mut rng, 20)));
    let params = DischargeParams::default();
    for g in &corpus {
        let ledger =
            run_discharge(g, &params, &GraphHooks::new(g, SearchCaps::default())).map_err(|e| e.to_string())?;
        ensure!(ledger.is_conserved(), "{} not conserved", g.to_graph6());
        ensure!(ledger.stage2_rounds <= g.n().max(1), "{}: {} rounds", g.to_graph6(), ledger.stage2_rounds);
    }
    let star = Graph::complete(1).join(&Graph::new(8));
    let ann = Annotations { degrees: Some([vec![8], vec![5; 8]].concat()), ..Annotations::default() };
    let ledger = run_discharge(&star, &params, &ann).map_err(|e| e.to_string())?;
    ensure!(ledger.is_conserved(), "star not conserved");
    Ok(format!("{} ledgers", corpus.len() + 1))
}

fn psi_table() -> Outcome {
    let e = eps();
    ensure!(psi(8, 7, &e).unwrap() == frac(12, 7) - &e / int(7), "psi(8,7)");
    ensure!(psi(7, 5, &e).unwrap() == frac(7, 5) - &e / int(5), "psi(7,5)");
    ensure!(psi(8, 8, &e).unwrap() == frac(3, 2) - &e / int(8), "psi(8,8)");
    for d in 6..=20 {
        for r in 1..d {
            ensure!(psi(d, r + 1, &e).unwrap() < psi(d, r, &e).unwrap(), "not decreasing in r at ({d},{r})");
            ensure!(psi(d - 1, r, &e).unwrap() < psi(d, r, &e).unwrap(), "not increasing in d at ({d},{r})");
        }
        for i in 0..=5 {
            if d - 1 > i {
                ensure!(psi(d - 1, d - 1 - i, &e).unwrap() < psi(d, d - i, &e).unwrap(), "psi(d,d-{i}) at {d}");
            }
        }
    }
    Ok("table and monotonicity exact".into())
}

fn edge_bound() -> Outcome {
    let mut sets = 0;
    let mut err = None;
    for g in four_critical() {
        let low: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) == 3).collect();
        for size in 0..=low.len() {
            subsets(&low, size, &mut |s| {
                let a = VertexSet::from_slice(s);
                if err.is_some() || !g.is_independent(&a) {
                    return;
                }
                let rep = independent_set_edge_bound(g, 4, &a, 1).unwrap();
                if !rep.degree_k_holds {
                    err = Some(format!("{} A={s:?}: {} > {}", g.to_graph6(), rep.degree_k_edges, rep.degree_k_bound));
                }
                sets += 1;
            });
        }
    }
    match err {
        Some(e) => Err(e),
        None => Ok(format!("{sets} independent sets")),
    }
}

fn clones() -> Outcome {
    let pp = PotentialParams::k6();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..100u64 {
        let g = generate_k_ore(6, 1 + (i % 4) as usize, i + 1).unwrap().graph;
        let low: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) == 5).collect();
        let &x = low.choose(&mut rng).unwrap();
        let &y = g.neighbors(x).to_vec().choose(&mut rng).unwrap();
        let h = clone_vertex(&g, x, y, 6).map_err(|e| e.to_string())?;
        ensure!(h.n() == g.n(), "clone {i}: vertex count");
        ensure!(h.edge_count() <= g.edge_count(), "clone {i}: edges grew");
        let (tg, th) = (clique_weight(&g, 6).unwrap().value, clique_weight(&h, 6).unwrap().value);
        ensure!(th <= tg + 1, "clone {i}: T {tg} -> {th}");
        let (pg, ph) = (potential(&g, &pp).unwrap(), potential(&h, &pp).unwrap());
        ensure!(ph >= &pg - &pp.delta, "clone {i}: p {pg} -> {ph}");
    }
    Ok("100 clones".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 12] = [
        ("exact potential of K6", 1, k6_potential),
        ("constant clauses", 1, assumption_one),
        ("KY equality on generated 6-Ore graphs", 120, ky_equality),
        ("clique-weight bound and oracle", 300, t_bound),
        ("gems avoiding vertices and K5s", 300, gems),
        ("strong density bound on 4-critical graphs", 600, strong_ky),
        ("collapsibility biconditional", 60, collapsibility),
        ("edge-addition witnesses", 60, edge_additions),
        ("charge conservation", 120, conservation),
        ("psi table", 1, psi_table),
        ("independent-set edge bound", 600, edge_bound),
        ("clone invariants", 120, clones),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        let out = match out {
            Ok(_) if took > Duration::from_secs(*budget) => Err(format!("took {took:.2?}, budget {budget}s")),
            o => o,
        };
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
