//! Shared fixtures and brute-force oracles.
#![allow(dead_code)]

use critgraph::canon::all_graphs;
use critgraph::coloring::is_critical;
use critgraph::ore::ore_compose;
use critgraph::{Graph, VertexSet};
use std::collections::HashMap;
use std::sync::OnceLock;

pub fn k6k6() -> Graph {
    ore_compose(&Graph::complete(6), (0, 1), &Graph::complete(6), 0, &[1, 2], &[3, 4, 5]).unwrap()
}

pub fn c5k3() -> Graph {
    Graph::cycle(5).join(&Graph::complete(3))
}

/// Every 4-critical graph on at most 8 vertices, one per class.
pub fn four_critical() -> &'static [Graph] {
    static CACHE: OnceLock<Vec<Graph>> = OnceLock::new();
    CACHE.get_or_init(|| (4..=8).flat_map(|n| all_graphs(n, 3)).filter(|g| is_critical(g, 4)).collect())
}

/// Smallest `c` admitting a proper colouring, by trying every assignment.
pub fn brute_chromatic(g: &Graph) -> usize {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let edges = g.edges();
    for c in 1..=n {
        let mut col = vec![0usize; n];
        loop {
            if edges.iter().all(|&(u, v)| col[u] != col[v]) {
                return c;
            }
            let mut i = 0;
            while i < n && col[i] == c - 1 {
                col[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            col[i] += 1;
        }
    }
    n
}

/// `T(G)` by memoised recursion on the set of unused vertices: the least
/// unused vertex is skipped or covered by a clique of size `k-1` or `k-2`.
pub fn naive_clique_weight(g: &Graph, k: usize) -> u64 {
    assert!(g.n() <= 16);
    let mut memo: HashMap<u32, u64> = HashMap::new();
    fn go(g: &Graph, k: usize, left: u32, memo: &mut HashMap<u32, u64>) -> u64 {
        if left == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&left) {
            return v;
        }
        let v = left.trailing_zeros() as usize;
        let rest = left & !(1 << v);
        let mut best = go(g, k, rest, memo);
        for (size, w) in [(k - 1, 2u64), (k - 2, 1u64)] {
            if size == 0 {
                continue;
            }
            let others: Vec<usize> = (0..g.n()).filter(|&u| rest >> u & 1 == 1 && g.has_edge(u, v)).collect();
            subsets(&others, size - 1, &mut |s| {
                let mut c: VertexSet = s.iter().copied().collect();
                c.insert(v);
                if g.is_clique(&c) {
                    let mask = s.iter().fold(rest, |m, &u| m & !(1 << u));
                    best = best.max(w + go(g, k, mask, memo));
                }
            });
        }
        memo.insert(left, best);
        best
    }
    go(g, k, if g.n() == 32 { u32::MAX } else { (1u32 << g.n()) - 1 }, &mut memo)
}

/// Calls `f` on every `size`-subset of `items`.
pub fn subsets(items: &[usize], size: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, size, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, size, 0, &mut Vec::new(), f);
}

/// `G(n, p)` from a proptest-friendly bit vector of length `n(n-1)/2`.
pub fn graph_from_bits(n: usize, bits: &[bool]) -> Graph {
    let mut g = Graph::new(n);
    let mut i = 0;
    for u in 0..n {
        for v in u + 1..n {
            if bits[i] {
                g.add_edge(u, v);
            }
            i += 1;
        }
    }
    g
}

pub fn arb_graph(max_n: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |b| graph_from_bits(n, &b))
    })
}
