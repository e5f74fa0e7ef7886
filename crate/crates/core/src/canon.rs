//! Canonical labelling by colour refinement and individualisation.
//!
//! Search tree leaves are compared by the relabelled adjacency rows and the
//! least one wins. Twins (equal open or closed neighbourhoods) are swapped by
//! an automorphism that fixes the current partition, so only one twin per
//! class is individualised.

use crate::graph::{Graph, VertexSet};
use std::collections::BTreeSet;

/// `labeling[v]` is the canonical label of `v`.
pub fn canonical_labeling(g: &Graph) -> Vec<usize> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let ctwin = twin_classes(g, true);
    let otwin = twin_classes(g, false);
    let mut best: Option<(Vec<VertexSet>, Vec<usize>)> = None;
    let init = refine(g, vec![(0..n).collect()]);
    search(g, init, &ctwin, &otwin, &mut best);
    best.expect("search reaches a leaf").1
}

/// The canonically relabelled graph; equal for isomorphic inputs.
pub fn canonical_form(g: &Graph) -> Graph {
    g.permute(&canonical_labeling(g))
}

pub fn are_isomorphic(g: &Graph, h: &Graph) -> bool {
    g.n() == h.n() && g.edge_count() == h.edge_count() && canonical_form(g) == canonical_form(h)
}

/// One graph per isomorphism class on `n` vertices with minimum degree at
/// least `min_degree`, canonical forms in graph6 order. Built by adding a
/// vertex to every class on `n - 1` vertices; fine up to `n = 8`.
pub fn all_graphs(n: usize, min_degree: usize) -> Vec<Graph> {
    let mut level: Vec<Graph> = vec![Graph::new(0)];
    for m in 1..=n {
        let last = m == n;
        let mut seen = BTreeSet::new();
        for g in &level {
            for mask in 0u64..1 << (m - 1) {
                let mut h = Graph::new(m);
                for (u, v) in g.edges() {
                    h.add_edge(u, v);
                }
                for u in 0..m - 1 {
                    if mask >> u & 1 == 1 {
                        h.add_edge(u, m - 1);
                    }
                }
                if last && h.min_degree() < min_degree {
                    continue;
                }
                seen.insert(canonical_form(&h).to_graph6());
            }
        }
        level = seen.iter().map(|s| Graph::from_graph6(s).expect("own graph6")).collect();
    }
    level
}

fn twin_classes(g: &Graph, closed: bool) -> Vec<usize> {
    let key = |v: usize| if closed { g.closed_neighbors(v) } else { *g.neighbors(v) };
    let mut ids = vec![usize::MAX; g.n()];
    for v in 0..g.n() {
        if ids[v] != usize::MAX {
            continue;
        }
        ids[v] = v;
        let kv = key(v);
        for w in v + 1..g.n() {
            if ids[w] == usize::MAX && key(w) == kv {
                ids[w] = v;
            }
        }
    }
    ids
}

type Partition = Vec<Vec<usize>>;

/// Equitable refinement; cells split by neighbour counts into earlier cells,
/// new cells ordered by that count vector.
fn refine(g: &Graph, mut cells: Partition) -> Partition {
    let n = g.n();
    let mut cell_of = vec![0usize; n];
    loop {
        for (i, c) in cells.iter().enumerate() {
            for &v in c {
                cell_of[v] = i;
            }
        }
        let k = cells.len();
        let mut changed = false;
        let mut next: Partition = Vec::with_capacity(k);
        for c in &cells {
            if c.len() == 1 {
                next.push(c.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<u32>, usize)> = c
                .iter()
                .map(|&v| {
                    let mut sig = vec![0u32; k];
                    for w in g.neighbors(v).iter() {
                        sig[cell_of[w]] += 1;
                    }
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|x| x.1).collect());
                    start = i;
                }
            }
            if next.last().map(|l| l.len()) != Some(c.len()) {
                changed = true;
            }
        }
        cells = next;
        if !changed {
            return cells;
        }
    }
}

fn search(
    g: &Graph,
    cells: Partition,
    ctwin: &[usize],
    otwin: &[usize],
    best: &mut Option<(Vec<VertexSet>, Vec<usize>)>,
) {
    let Some(target) = cells.iter().position(|c| c.len() > 1) else {
        let mut lab = vec![0; g.n()];
        for (i, c) in cells.iter().enumerate() {
            lab[c[0]] = i;
        }
        let rows = g.permute(&lab);
        let rows: Vec<VertexSet> = (0..g.n()).map(|v| *rows.neighbors(v)).collect();
        if best.as_ref().is_none_or(|(b, _)| rows < *b) {
            *best = Some((rows, lab));
        }
        return;
    };
    let cell = cells[target].clone();
    let mut tried: Vec<usize> = Vec::new();
    for &v in &cell {
        if tried.iter().any(|&w| ctwin[w] == ctwin[v] || otwin[w] == otwin[v]) {
            continue;
        }
        tried.push(v);
        let mut next = Vec::with_capacity(cells.len() + 1);
        next.extend_from_slice(&cells[..target]);
        next.push(vec![v]);
        next.push(cell.iter().copied().filter(|&w| w != v).collect());
        next.extend_from_slice(&cells[target + 1..]);
        search(g, refine(g, next), ctwin, otwin, best);
    }
}
