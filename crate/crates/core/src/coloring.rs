//! Exact vertex colouring, criticality and list colouring.

use crate::cliques::max_clique;
use crate::graph::{Graph, LoopPolicy, VertexSet};
use std::collections::HashMap;
use thiserror::Error;

/// Default cap on `sum f` for [`is_f_choosable`].
pub const CHOOSABILITY_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColoringError {
    #[error("graph is already {0}-colorable, so it has no {1}-critical subgraph")]
    Colorable(usize, usize),
    #[error("sum of list sizes {sum} exceeds cap {cap}")]
    ResourceLimit { sum: usize, cap: usize },
    #[error("list-size vector has length {got}, graph has {n} vertices")]
    BadListSizes { got: usize, n: usize },
}

/// A proper `c`-colouring with colours `1..=c`, or `None`.
///
/// Exact. Vertices of degree below `c` are peeled off and coloured last, and
/// the rest is split at components, cut vertices and 2-vertex separators; for
/// a separator `{a, b}` both sides are solved with `ab` forced apart (edge
/// added) or together (identified). Pieces that no longer split go to DSATUR:
/// most saturated vertex first, ties by uncoloured degree and then lowest
/// index, colours in increasing order, with a maximum clique precoloured.
/// The witness is a deterministic function of the graph.
pub fn is_colorable(g: &Graph, c: usize) -> Option<Vec<usize>> {
    if g.n() == 0 {
        return Some(Vec::new());
    }
    if c == 0 {
        return None;
    }
    split_color(g, c, &mut HashMap::new())
}

// 2-separator search is quadratic in BFS calls; skip it above this size.
const SEPARATOR_SEARCH_MAX: usize = 160;

type Memo = HashMap<String, Option<Vec<usize>>>;

fn split_color(g: &Graph, c: usize, memo: &mut Memo) -> Option<Vec<usize>> {
    let n = g.n();
    if n == 0 {
        return Some(Vec::new());
    }
    if c >= n {
        return Some((1..=n).collect());
    }
    let key = g.to_graph6();
    if let Some(r) = memo.get(&key) {
        return r.clone();
    }
    let r = split_color_uncached(g, c, memo);
    memo.insert(key, r.clone());
    r
}

fn split_color_uncached(g: &Graph, c: usize, memo: &mut Memo) -> Option<Vec<usize>> {
    let n = g.n();
    if let Some(v) = (0..n).find(|&v| g.degree(v) < c) {
        let (h, labels) = g.remove_vertices(&VertexSet::from_slice(&[v]));
        let mut color = vec![0; n];
        for (i, col) in split_color(&h, c, memo)?.into_iter().enumerate() {
            color[labels[i]] = col;
        }
        color[v] = (1..=c)
            .find(|&col| g.neighbors(v).iter().all(|w| color[w] != col))
            .expect("degree below c leaves a colour free");
        return Some(color);
    }
    let comps = g.components();
    if comps.len() > 1 {
        let mut color = vec![0; n];
        for comp in &comps {
            let (h, labels) = g.induced_subgraph(comp);
            for (i, col) in split_color(&h, c, memo)?.into_iter().enumerate() {
                color[labels[i]] = col;
            }
        }
        return Some(color);
    }
    match separator(g) {
        Some((cut, side)) => glue(g, c, &cut, &side, memo),
        None => dsatur(g, c),
    }
}

/// A cut vertex or, failing that, the most balanced 2-vertex separator, with
/// the smallest component it leaves behind.
fn separator(g: &Graph) -> Option<(Vec<usize>, VertexSet)> {
    let n = g.n();
    let all = g.vertices();
    let smallest = |comps: Vec<VertexSet>| comps.into_iter().min_by_key(|s| s.len()).expect("nonempty");
    for v in 0..n {
        let comps = g.components_within(&all.difference(&VertexSet::from_slice(&[v])));
        if comps.len() > 1 {
            return Some((vec![v], smallest(comps)));
        }
    }
    if n > SEPARATOR_SEARCH_MAX {
        return None;
    }
    let mut best: Option<(Vec<usize>, VertexSet)> = None;
    for a in 0..n {
        for b in a + 1..n {
            let comps = g.components_within(&all.difference(&VertexSet::from_slice(&[a, b])));
            if comps.len() > 1 {
                let side = smallest(comps);
                if best.as_ref().is_none_or(|(_, s)| side.len() > s.len()) {
                    best = Some((vec![a, b], side));
                }
            }
        }
    }
    best
}

/// Colour `g` from colourings of the two sides of the separator `cut`.
fn glue(g: &Graph, c: usize, cut: &[usize], side: &VertexSet, memo: &mut Memo) -> Option<Vec<usize>> {
    let cut_set = VertexSet::from_slice(cut);
    let left = side.union(&cut_set);
    let right = g.vertices().difference(side);
    let mut relations = vec![false];
    if cut.len() == 2 && !g.has_edge(cut[0], cut[1]) {
        relations.push(true);
    }
    for same in relations {
        let Some(c1) = color_side(g, c, &left, cut, same, memo) else { continue };
        let Some(c2) = color_side(g, c, &right, cut, same, memo) else { continue };
        // rename the colours of the right side to agree on the separator
        let mut map = vec![0; c + 1];
        let mut used = vec![false; c + 1];
        for &x in cut {
            map[c2[x]] = c1[x];
            used[c1[x]] = true;
        }
        let mut free = (1..=c).filter(|&col| !used[col]);
        for col in 1..=c {
            if map[col] == 0 && !cut.iter().any(|&x| c2[x] == col) {
                map[col] = free.next().expect("colour counts match");
            }
        }
        let mut color = c1;
        for v in right.iter() {
            color[v] = map[c2[v]];
        }
        return Some(color);
    }
    None
}

/// Colouring of `g[part]` (in `g`'s labels, zero elsewhere) with the
/// separator pair forced equal when `same`, distinct otherwise.
fn color_side(g: &Graph, c: usize, part: &VertexSet, cut: &[usize], same: bool, memo: &mut Memo) -> Option<Vec<usize>> {
    let (mut h, labels) = g.induced_subgraph(part);
    let pos = |x: usize| labels.iter().position(|&l| l == x).expect("separator inside part");
    let mut local: Vec<usize> = if cut.len() == 2 {
        let (i, j) = (pos(cut[0]), pos(cut[1]));
        if same {
            let merged = h.identify_vertices(i, j, LoopPolicy::Reject).expect("separator pair is non-adjacent");
            let col = split_color(&merged, c, memo)?;
            let (keep, gone) = (i.min(j), i.max(j));
            (0..h.n())
                .map(|w| {
                    col[if w == gone {
                        keep
                    } else if w > gone {
                        w - 1
                    } else {
                        w
                    }]
                })
                .collect()
        } else {
            h.add_edge(i, j);
            split_color(&h, c, memo)?
        }
    } else {
        split_color(&h, c, memo)?
    };
    let mut color = vec![0; g.n()];
    for (i, col) in local.drain(..).enumerate() {
        color[labels[i]] = col;
    }
    Some(color)
}

fn dsatur(g: &Graph, c: usize) -> Option<Vec<usize>> {
    let n = g.n();
    let clique = max_clique(g);
    if clique.len() > c {
        return None;
    }
    let mut st = Dsatur::new(g, c);
    for (i, v) in clique.iter().enumerate() {
        st.assign(v, i + 1);
    }
    st.max_used = clique.len();
    if st.search(n - clique.len()) {
        Some(st.color)
    } else {
        None
    }
}

struct Dsatur<'a> {
    g: &'a Graph,
    c: usize,
    color: Vec<usize>,
    // cnt[v * (c + 1) + col] = neighbours of v coloured col
    cnt: Vec<u16>,
    sat: Vec<usize>,
    udeg: Vec<usize>,
    max_used: usize,
}

impl<'a> Dsatur<'a> {
    fn new(g: &'a Graph, c: usize) -> Self {
        let n = g.n();
        Dsatur {
            g,
            c,
            color: vec![0; n],
            cnt: vec![0; n * (c + 1)],
            sat: vec![0; n],
            udeg: (0..n).map(|v| g.degree(v)).collect(),
            max_used: 0,
        }
    }

    fn assign(&mut self, v: usize, col: usize) {
        self.color[v] = col;
        for w in self.g.neighbors(v).iter() {
            self.udeg[w] -= 1;
            let i = w * (self.c + 1) + col;
            if self.cnt[i] == 0 {
                self.sat[w] += 1;
            }
            self.cnt[i] += 1;
        }
    }

    fn unassign(&mut self, v: usize) {
        let col = self.color[v];
        self.color[v] = 0;
        for w in self.g.neighbors(v).iter() {
            self.udeg[w] += 1;
            let i = w * (self.c + 1) + col;
            self.cnt[i] -= 1;
            if self.cnt[i] == 0 {
                self.sat[w] -= 1;
            }
        }
    }

    fn pick(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.g.n() {
            if self.color[v] != 0 {
                continue;
            }
            match best {
                None => best = Some(v),
                Some(b) => {
                    if (self.sat[v], self.udeg[v]) > (self.sat[b], self.udeg[b]) {
                        best = Some(v);
                    }
                }
            }
        }
        best
    }

    fn search(&mut self, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        let v = self.pick().expect("uncoloured vertex remains");
        if self.sat[v] >= self.c {
            return false;
        }
        let top = (self.max_used + 1).min(self.c);
        for col in 1..=top {
            if self.cnt[v * (self.c + 1) + col] != 0 {
                continue;
            }
            let saved = self.max_used;
            self.max_used = self.max_used.max(col);
            self.assign(v, col);
            if self.search(left - 1) {
                return true;
            }
            self.unassign(v);
            self.max_used = saved;
        }
        false
    }
}

/// `true` if `col` is a proper colouring of `g` with colours in `1..=c`.
pub fn is_proper_coloring(g: &Graph, col: &[usize], c: usize) -> bool {
    col.len() == g.n() && col.iter().all(|&x| (1..=c).contains(&x)) && g.edges().iter().all(|&(u, v)| col[u] != col[v])
}

/// Chromatic number; 0 for the graph with no vertices.
pub fn chromatic_number(g: &Graph) -> usize {
    if g.n() == 0 {
        return 0;
    }
    let mut c = max_clique(g).len().max(1);
    while is_colorable(g, c).is_none() {
        c += 1;
    }
    c
}

/// `chi(g) = k` and every proper subgraph has smaller chromatic number.
///
/// Edge deletions alone do not see isolated vertices, so those are ruled out
/// separately (for `k >= 2`); for `k = 1` the only critical graph is `K1`.
pub fn is_critical(g: &Graph, k: usize) -> bool {
    match k {
        0 => return g.n() == 0,
        1 => return g.n() == 1,
        _ => {}
    }
    if g.n() < k || g.min_degree() < k - 1 {
        return false;
    }
    if is_colorable(g, k - 1).is_some() || is_colorable(g, k).is_none() {
        return false;
    }
    g.edges().iter().all(|&(u, v)| is_colorable(&g.without_edge(u, v), k - 1).is_some())
}

/// A subgraph of some host, relabelled onto `0..vertices.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    /// Host labels, increasing; vertex `i` of `graph` is `vertices[i]`.
    pub vertices: Vec<usize>,
    pub graph: Graph,
}

impl Subgraph {
    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::from_slice(&self.vertices)
    }

    /// Edges in host labels.
    pub fn host_edges(&self) -> Vec<(usize, usize)> {
        self.graph.edges().into_iter().map(|(a, b)| (self.vertices[a], self.vertices[b])).collect()
    }
}

/// Greedy minimal non-`(k-1)`-colourable subgraph: delete vertices lowest
/// index first while the rest stays non-`(k-1)`-colourable, then edges in
/// lexicographic order the same way. The result is `k`-critical.
pub fn extract_critical_subgraph(g: &Graph, k: usize) -> Result<Subgraph, ColoringError> {
    if k == 0 || is_colorable(g, k - 1).is_some() {
        return Err(ColoringError::Colorable(k.saturating_sub(1), k));
    }
    let mut keep = g.vertices();
    for v in 0..g.n() {
        let mut trial = keep;
        trial.remove(v);
        if is_colorable(&g.induced_subgraph(&trial).0, k - 1).is_none() {
            keep = trial;
        }
    }
    let (mut h, labels) = g.induced_subgraph(&keep);
    for (u, v) in h.edges() {
        h.remove_edge(u, v);
        if is_colorable(&h, k - 1).is_some() {
            h.add_edge(u, v);
        }
    }
    debug_assert!(h.min_degree() + 1 >= k);
    Ok(Subgraph { vertices: labels, graph: h })
}

/// Whether every assignment of lists with `|L(v)| = f[v]` admits a proper
/// list colouring. Lists are enumerated up to renaming of colours over a
/// universe of `sum f` colours; `sum f > cap` is refused.
pub fn is_f_choosable(g: &Graph, f: &[usize], cap: usize) -> Result<bool, ColoringError> {
    Ok(bad_list_assignment(g, f, cap)?.is_none())
}

/// A list assignment with no proper colouring, if one exists. Lists are
/// sorted colour numbers.
pub fn bad_list_assignment(g: &Graph, f: &[usize], cap: usize) -> Result<Option<Vec<Vec<usize>>>, ColoringError> {
    let n = g.n();
    if f.len() != n {
        return Err(ColoringError::BadListSizes { got: f.len(), n });
    }
    let sum: usize = f.iter().sum();
    if sum > cap {
        return Err(ColoringError::ResourceLimit { sum, cap });
    }
    // Vertices outside the bad part get private colours from 32 upwards.
    let pad = |out: &mut Vec<Vec<usize>>| {
        let mut next = 32;
        for v in 0..n {
            if out[v].is_empty() {
                out[v] = (next..next + f[v]).collect();
                next += f[v];
            }
        }
    };
    if f.contains(&0) {
        let mut out = vec![Vec::new(); n];
        pad(&mut out);
        return Ok(Some(out));
    }
    // Peel vertices with more colours than neighbours: they can always be
    // coloured last.
    let mut live = g.vertices();
    while let Some(v) = live.iter().find(|&v| f[v] > g.degree_in(v, &live)) {
        live.remove(v);
    }
    for comp in g.components_within(&live) {
        if let Some(bad) = bad_on_component(g, f, &comp) {
            let mut out = vec![Vec::new(); n];
            for (v, m) in bad {
                out[v] = (0..32).filter(|&c| m >> c & 1 == 1).collect();
            }
            pad(&mut out);
            return Ok(Some(out));
        }
    }
    Ok(None)
}

fn bad_on_component(g: &Graph, f: &[usize], comp: &VertexSet) -> Option<Vec<(usize, u32)>> {
    // BFS order so vertices close early.
    let start = comp.first()?;
    let mut order = vec![start];
    let mut seen = VertexSet::new();
    seen.insert(start);
    let mut i = 0;
    while i < order.len() {
        for w in g.neighbors(order[i]).intersection(comp).iter() {
            if !seen.contains(w) {
                seen.insert(w);
                order.push(w);
            }
        }
        i += 1;
    }
    let m = order.len();
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let nbrs: Vec<Vec<usize>> =
        order.iter().map(|&v| g.neighbors(v).intersection(comp).iter().map(|w| pos[w]).collect()).collect();
    let fs: Vec<usize> = order.iter().map(|&v| f[v]).collect();
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..m {
        let t = nbrs[i].iter().copied().chain([i]).max().unwrap();
        closes[t].push(i);
    }
    let mut lists = vec![0u32; m];
    let mut found = None;
    enumerate(0, 0, &nbrs, &fs, &closes, &mut lists, &mut found);
    found.map(|l: Vec<u32>| order.iter().zip(l).map(|(&v, m)| (v, m)).collect())
}

fn enumerate(
    i: usize,
    used: usize,
    nbrs: &[Vec<usize>],
    fs: &[usize],
    closes: &[Vec<usize>],
    lists: &mut Vec<u32>,
    found: &mut Option<Vec<u32>>,
) {
    if found.is_some() {
        return;
    }
    let m = fs.len();
    if i == m {
        if !list_colorable(nbrs, lists) {
            *found = Some(lists.clone());
        }
        return;
    }
    let f = fs[i];
    for a in (0..=f.min(used)).rev() {
        let new = f - a;
        if used + new > 32 {
            continue;
        }
        let fresh: u32 = ((1u64 << (used + new)) - (1u64 << used)) as u32;
        for_each_subset(used, a, &mut |old: u32| {
            if found.is_some() {
                return;
            }
            lists[i] = old | fresh;
            if closes[i].iter().all(|&w| !has_avoidable_private(w, nbrs, fs, lists)) {
                enumerate(i + 1, used + new, nbrs, fs, closes, lists, found);
            }
        });
    }
}

// A closed vertex whose list has a colour no neighbour can use, while its
// neighbours' lists together offer enough colours, is never needed: swapping
// that colour for a neighbour's gives a bad assignment with fewer such colours.
fn has_avoidable_private(w: usize, nbrs: &[Vec<usize>], fs: &[usize], lists: &[u32]) -> bool {
    let around = nbrs[w].iter().fold(0u32, |acc, &u| acc | lists[u]);
    lists[w] & !around != 0 && around.count_ones() as usize >= fs[w]
}

fn for_each_subset(universe: usize, size: usize, cb: &mut dyn FnMut(u32)) {
    fn rec(start: usize, universe: usize, left: usize, acc: u32, cb: &mut dyn FnMut(u32)) {
        if left == 0 {
            cb(acc);
            return;
        }
        for c in start..universe {
            if universe - c < left {
                break;
            }
            rec(c + 1, universe, left - 1, acc | 1 << c, cb);
        }
    }
    rec(0, universe, size, 0, cb);
}

fn list_colorable(nbrs: &[Vec<usize>], lists: &[u32]) -> bool {
    let m = lists.len();
    let mut col = vec![u32::MAX; m];
    fn rec(nbrs: &[Vec<usize>], lists: &[u32], col: &mut Vec<u32>, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        // most constrained uncoloured vertex
        let mut best = usize::MAX;
        let mut best_avail = 0u32;
        let mut best_cnt = u32::MAX;
        for v in 0..lists.len() {
            if col[v] != u32::MAX {
                continue;
            }
            let mut avail = lists[v];
            for &u in &nbrs[v] {
                if col[u] != u32::MAX {
                    avail &= !(1 << col[u]);
                }
            }
            if avail.count_ones() < best_cnt {
                best = v;
                best_avail = avail;
                best_cnt = avail.count_ones();
            }
        }
        let mut a = best_avail;
        while a != 0 {
            let c = a.trailing_zeros();
            a &= a - 1;
            col[best] = c;
            if rec(nbrs, lists, col, left - 1) {
                return true;
            }
        }
        col[best] = u32::MAX;
        false
    }
    rec(nbrs, lists, &mut col, m)
}

/// Visit every proper colouring with colours `1..=c` once per renaming of
/// colours: vertex `v` gets at most one more than the largest colour used
/// on `0..v`. The callback returns `false` to stop early; the return value
/// is `false` iff stopped.
pub fn for_each_coloring_up_to_renaming(g: &Graph, c: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(
        g: &Graph,
        c: usize,
        v: usize,
        top: usize,
        col: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if v == g.n() {
            return f(col);
        }
        for x in 1..=(top + 1).min(c) {
            if g.neighbors(v).iter().any(|w| w < v && col[w] == x) {
                continue;
            }
            col[v] = x;
            if !go(g, c, v + 1, top.max(x), col, f) {
                return false;
            }
        }
        col[v] = 0;
        true
    }
    go(g, c, 0, 0, &mut vec![0; g.n()], f)
}
