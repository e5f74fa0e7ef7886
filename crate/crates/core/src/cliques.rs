//! Clique search: maximum cliques, enumeration by size, and vertex-disjoint
//! clique packings.

use crate::graph::{Graph, VertexSet};

/// A maximum clique (lowest-index-first among ties of the search order).
pub fn max_clique(g: &Graph) -> VertexSet {
    let mut best = VertexSet::new();
    let mut cur = VertexSet::new();
    expand(g, &mut cur, g.vertices(), &mut best);
    best
}

pub fn clique_number(g: &Graph) -> usize {
    max_clique(g).len()
}

fn expand(g: &Graph, cur: &mut VertexSet, cand: VertexSet, best: &mut VertexSet) {
    if cand.is_empty() {
        if cur.len() > best.len() {
            *best = *cur;
        }
        return;
    }
    // Greedy colouring of the candidates bounds the clique size reachable here.
    let (order, colors) = greedy_color_bound(g, &cand);
    let base = cur.len();
    let mut cand = cand;
    for i in (0..order.len()).rev() {
        if base + colors[i] <= best.len() {
            return;
        }
        let v = order[i];
        cur.insert(v);
        expand(g, cur, cand.intersection(g.neighbors(v)), best);
        cur.remove(v);
        cand.remove(v);
    }
}

fn greedy_color_bound(g: &Graph, cand: &VertexSet) -> (Vec<usize>, Vec<usize>) {
    let mut order = Vec::with_capacity(cand.len());
    let mut colors = Vec::with_capacity(cand.len());
    let mut left = *cand;
    let mut color = 0;
    while !left.is_empty() {
        color += 1;
        let mut avail = left;
        while let Some(v) = avail.first() {
            avail.remove(v);
            avail = avail.difference(g.neighbors(v));
            left.remove(v);
            order.push(v);
            colors.push(color);
        }
    }
    (order, colors)
}

/// All cliques with exactly `size` vertices, in lexicographic order.
pub fn cliques_of_size(g: &Graph, size: usize) -> Vec<VertexSet> {
    let mut out = Vec::new();
    if size == 0 {
        out.push(VertexSet::new());
        return out;
    }
    fn rec(g: &Graph, cur: &mut VertexSet, cand: VertexSet, need: usize, out: &mut Vec<VertexSet>) {
        if need == 0 {
            out.push(*cur);
            return;
        }
        if cand.len() < need {
            return;
        }
        for v in cand.iter() {
            let mut rest = cand.intersection(g.neighbors(v));
            // keep only labels above v
            for w in rest.iter() {
                if w < v {
                    rest.remove(w);
                }
            }
            cur.insert(v);
            rec(g, cur, rest, need - 1, out);
            cur.remove(v);
        }
    }
    rec(g, &mut VertexSet::new(), g.vertices(), size, &mut out);
    out
}

/// A weighted family of vertex sets to be packed disjointly.
#[derive(Debug, Clone)]
pub struct Packing {
    pub value: u64,
    /// Indices into the candidate list.
    pub chosen: Vec<usize>,
}

/// Maximum total weight of pairwise-disjoint sets among `cands`, by branch and
/// bound on the lowest uncovered vertex. `per_vertex_bound(c)` must bound the
/// value achievable on any `c` free vertices.
pub fn max_weight_disjoint(cands: &[(VertexSet, u64)], per_vertex_bound: &dyn Fn(usize) -> u64) -> Packing {
    let mut by_vertex: Vec<Vec<usize>> = Vec::new();
    let mut cover = VertexSet::new();
    for (i, (s, _)) in cands.iter().enumerate() {
        for v in s.iter() {
            if by_vertex.len() <= v {
                by_vertex.resize(v + 1, Vec::new());
            }
            by_vertex[v].push(i);
        }
        cover = cover.union(s);
    }
    for list in &mut by_vertex {
        // heavier sets first finds good incumbents early
        list.sort_by_key(|&i| std::cmp::Reverse(cands[i].1));
    }
    struct St<'a> {
        cands: &'a [(VertexSet, u64)],
        by_vertex: Vec<Vec<usize>>,
        bound: &'a dyn Fn(usize) -> u64,
        best: u64,
        best_set: Vec<usize>,
        cur: Vec<usize>,
    }
    fn go(st: &mut St, free: VertexSet, val: u64) {
        let free = prune(st, free);
        if val > st.best {
            st.best = val;
            st.best_set = st.cur.clone();
        }
        if val + (st.bound)(free.len()) <= st.best {
            return;
        }
        let Some(v) = free.first() else { return };
        let mut rest = free;
        rest.remove(v);
        for idx in 0..st.by_vertex[v].len() {
            let i = st.by_vertex[v][idx];
            let (s, w) = st.cands[i];
            if s.is_subset(&free) {
                st.cur.push(i);
                go(st, free.difference(&s), val + w);
                st.cur.pop();
            }
        }
        go(st, rest, val);
    }
    // Drop free vertices that no remaining set fits on.
    fn prune(st: &St, free: VertexSet) -> VertexSet {
        let mut live = VertexSet::new();
        for v in free.iter() {
            if live.contains(v) {
                continue;
            }
            for &i in &st.by_vertex[v] {
                let s = st.cands[i].0;
                if s.is_subset(&free) {
                    live = live.union(&s);
                    break;
                }
            }
        }
        live
    }
    let mut st = St { cands, by_vertex, bound: per_vertex_bound, best: 0, best_set: Vec::new(), cur: Vec::new() };
    go(&mut st, cover, 0);
    let mut chosen = st.best_set;
    chosen.sort_unstable();
    Packing { value: st.best, chosen }
}
