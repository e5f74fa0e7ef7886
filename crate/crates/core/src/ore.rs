//! Ore compositions: building, random generation, recognition and frames.

use crate::canon::canonical_labeling;
use crate::graph::{Graph, GraphError, LoopPolicy, VertexSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Default node budget for [`recognize_k_ore`].
pub const RECOGNITION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OreError {
    #[error("k = {0} is too small (need k >= 3)")]
    BadK(usize),
    #[error("({0}, {1}) is not an edge of the edge side")]
    NotAnEdge(usize, usize),
    #[error("vertex {0} is not in the vertex side")]
    NoSuchVertex(usize),
    #[error("parts must split N(z) into two nonempty disjoint sets")]
    BadBipartition,
    #[error("invalid split pair ({0}, {1}): {2}")]
    BadSplitPair(usize, usize, &'static str),
    #[error("trace is inconsistent: {0}")]
    BadTrace(String),
    #[error("recognition budget of {0} nodes exhausted")]
    BudgetExhausted(u64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How a graph arises from copies of `K_k` by Ore compositions. Replaying a
/// trace reproduces the graph it was recorded for, labels included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OreTrace {
    /// `K_k` on `0..k`.
    Leaf {
        k: usize,
    },
    Node(Box<OreNode>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OreNode {
    pub edge_side: OreTrace,
    pub vertex_side: OreTrace,
    /// `(x, y)` in edge-side labels; deleted in the composition.
    pub replaced_edge: [usize; 2],
    /// `z` in vertex-side labels.
    pub split_vertex: usize,
    /// Neighbours of `z` (vertex-side labels) that go to `x`.
    pub to_x: Vec<usize>,
    /// Neighbours of `z` that go to `y`.
    pub to_y: Vec<usize>,
    /// Edge-side label to composed label.
    pub edge_side_map: Vec<usize>,
    /// Vertex-side label to composed label; `None` at `z`.
    pub vertex_side_map: Vec<Option<usize>>,
}

impl OreTrace {
    pub fn k(&self) -> usize {
        match self {
            OreTrace::Leaf { k } => *k,
            OreTrace::Node(nd) => nd.edge_side.k(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            OreTrace::Leaf { k } => *k,
            OreTrace::Node(nd) => nd.edge_side.n() + nd.vertex_side.n() - 1,
        }
    }

    /// Number of compositions.
    pub fn ops(&self) -> usize {
        match self {
            OreTrace::Leaf { .. } => 0,
            OreTrace::Node(nd) => 1 + nd.edge_side.ops() + nd.vertex_side.ops(),
        }
    }

    /// Rebuild the graph, checking every step.
    pub fn replay(&self) -> Result<Graph, OreError> {
        match self {
            OreTrace::Leaf { k } => {
                if *k < 3 {
                    return Err(OreError::BadK(*k));
                }
                Ok(Graph::complete(*k))
            }
            OreTrace::Node(nd) => {
                let g1 = nd.edge_side.replay()?;
                let g2 = nd.vertex_side.replay()?;
                if nd.edge_side.k() != nd.vertex_side.k() {
                    return Err(OreError::BadTrace("sides built from different k".into()));
                }
                let [x, y] = nd.replaced_edge;
                let z = nd.split_vertex;
                if !g1.has_edge(x, y) {
                    return Err(OreError::NotAnEdge(x, y));
                }
                if z >= g2.n() {
                    return Err(OreError::NoSuchVertex(z));
                }
                check_parts(&g2, z, &nd.to_x, &nd.to_y)?;
                let n = g1.n() + g2.n() - 1;
                if nd.edge_side_map.len() != g1.n() || nd.vertex_side_map.len() != g2.n() {
                    return Err(OreError::BadTrace("label map length".into()));
                }
                let mut seen = VertexSet::new();
                let mut image = |v: usize| -> Result<usize, OreError> {
                    if v >= n || seen.contains(v) {
                        return Err(OreError::BadTrace(format!("label map is not a bijection at {v}")));
                    }
                    seen.insert(v);
                    Ok(v)
                };
                for &v in &nd.edge_side_map {
                    image(v)?;
                }
                for (i, v) in nd.vertex_side_map.iter().enumerate() {
                    match (i == z, v) {
                        (true, None) => {}
                        (false, Some(v)) => {
                            image(*v)?;
                        }
                        _ => return Err(OreError::BadTrace("vertex-side map must be None exactly at z".into())),
                    }
                }
                let m1 = &nd.edge_side_map;
                let m2 = |v: usize| nd.vertex_side_map[v].expect("checked above");
                let mut g = Graph::new(n);
                for (a, b) in g1.edges() {
                    if (a, b) != (x.min(y), x.max(y)) {
                        g.add_edge(m1[a], m1[b]);
                    }
                }
                for (a, b) in g2.edges() {
                    if a != z && b != z {
                        g.add_edge(m2(a), m2(b));
                    }
                }
                for &w in &nd.to_x {
                    g.add_edge(m1[x], m2(w));
                }
                for &w in &nd.to_y {
                    g.add_edge(m1[y], m2(w));
                }
                Ok(g)
            }
        }
    }

    /// The same decomposition for the graph relabelled by `perm` (`v -> perm[v]`).
    pub fn relabel(&self, perm: &[usize]) -> OreTrace {
        match self {
            OreTrace::Leaf { k } => OreTrace::Leaf { k: *k },
            OreTrace::Node(nd) => {
                let mut nd = (**nd).clone();
                for v in &mut nd.edge_side_map {
                    *v = perm[*v];
                }
                for v in nd.vertex_side_map.iter_mut().flatten() {
                    *v = perm[*v];
                }
                OreTrace::Node(Box::new(nd))
            }
        }
    }
}

fn check_parts(g2: &Graph, z: usize, to_x: &[usize], to_y: &[usize]) -> Result<(), OreError> {
    let a = VertexSet::from_slice(to_x);
    let b = VertexSet::from_slice(to_y);
    if a.is_empty() || b.is_empty() || a.len() != to_x.len() || b.len() != to_y.len() {
        return Err(OreError::BadBipartition);
    }
    if !a.is_disjoint(&b) || a.union(&b) != *g2.neighbors(z) {
        return Err(OreError::BadBipartition);
    }
    Ok(())
}

/// A graph with a trace that replays to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OreGraph {
    pub graph: Graph,
    pub trace: OreTrace,
}

impl OreGraph {
    pub fn complete(k: usize) -> Result<Self, OreError> {
        if k < 3 {
            return Err(OreError::BadK(k));
        }
        Ok(OreGraph { graph: Graph::complete(k), trace: OreTrace::Leaf { k } })
    }
}

/// Ore composition of `g1` and `g2`: delete `xy` from `g1`, split `z` of `g2`
/// into `x` (taking `to_x`) and `y` (taking `to_y`). Edge-side vertices keep
/// their labels; the other vertex-side vertices follow in increasing order.
pub fn ore_compose(
    g1: &Graph,
    xy: (usize, usize),
    g2: &Graph,
    z: usize,
    to_x: &[usize],
    to_y: &[usize],
) -> Result<Graph, OreError> {
    Ok(compose_maps(g1, xy, g2, z, to_x, to_y)?.replay_graph)
}

struct Composed {
    replay_graph: Graph,
    vertex_side_map: Vec<Option<usize>>,
}

fn compose_maps(
    g1: &Graph,
    (x, y): (usize, usize),
    g2: &Graph,
    z: usize,
    to_x: &[usize],
    to_y: &[usize],
) -> Result<Composed, OreError> {
    if !g1.has_edge(x, y) {
        return Err(OreError::NotAnEdge(x, y));
    }
    if z >= g2.n() {
        return Err(OreError::NoSuchVertex(z));
    }
    check_parts(g2, z, to_x, to_y)?;
    let n1 = g1.n();
    let map2: Vec<Option<usize>> = (0..g2.n())
        .map(|v| match v.cmp(&z) {
            std::cmp::Ordering::Less => Some(n1 + v),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(n1 + v - 1),
        })
        .collect();
    let mut g = Graph::try_new(n1 + g2.n() - 1)?;
    for (a, b) in g1.edges() {
        if (a, b) != (x.min(y), x.max(y)) {
            g.add_edge(a, b);
        }
    }
    for (a, b) in g2.edges() {
        if a != z && b != z {
            g.add_edge(map2[a].unwrap(), map2[b].unwrap());
        }
    }
    for &w in to_x {
        g.add_edge(x, map2[w].unwrap());
    }
    for &w in to_y {
        g.add_edge(y, map2[w].unwrap());
    }
    Ok(Composed { replay_graph: g, vertex_side_map: map2 })
}

/// [`ore_compose`] on traced graphs, recording the step.
pub fn ore_compose_traced(
    edge_side: &OreGraph,
    xy: (usize, usize),
    vertex_side: &OreGraph,
    z: usize,
    to_x: &[usize],
    to_y: &[usize],
) -> Result<OreGraph, OreError> {
    if edge_side.trace.k() != vertex_side.trace.k() {
        return Err(OreError::BadTrace("sides built from different k".into()));
    }
    let c = compose_maps(&edge_side.graph, xy, &vertex_side.graph, z, to_x, to_y)?;
    let node = OreNode {
        edge_side: edge_side.trace.clone(),
        vertex_side: vertex_side.trace.clone(),
        replaced_edge: [xy.0, xy.1],
        split_vertex: z,
        to_x: to_x.to_vec(),
        to_y: to_y.to_vec(),
        edge_side_map: (0..edge_side.graph.n()).collect(),
        vertex_side_map: c.vertex_side_map,
    };
    Ok(OreGraph { graph: c.replay_graph, trace: OreTrace::Node(Box::new(node)) })
}

/// A random `k`-Ore graph on `k + ops * (k - 1)` vertices.
///
/// Starts from `ops + 1` copies of `K_k`; each step picks an ordered pair of
/// graphs from the pool as edge side and vertex side, an edge, a vertex and
/// one of the `2^deg - 2` ordered bipartitions of its neighbourhood, all
/// uniformly, and puts the composition back. Same seed, same graph.
pub fn generate_k_ore(k: usize, ops: usize, seed: u64) -> Result<OreGraph, OreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = vec![OreGraph::complete(k)?; ops + 1];
    while pool.len() > 1 {
        let i = rng.gen_range(0..pool.len());
        let e = pool.swap_remove(i);
        let j = rng.gen_range(0..pool.len());
        let v = pool.swap_remove(j);
        let edges = e.graph.edges();
        let &xy = edges.choose(&mut rng).expect("k-Ore graphs have edges");
        let z = rng.gen_range(0..v.graph.n());
        let nb = v.graph.neighbors(z).to_vec();
        let d = nb.len();
        let mask: u64 = rng.gen_range(1..(1u64 << d) - 1);
        let (to_x, to_y): (Vec<usize>, Vec<usize>) = {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (t, &w) in nb.iter().enumerate() {
                if mask >> t & 1 == 1 {
                    a.push(w);
                } else {
                    b.push(w);
                }
            }
            (a, b)
        };
        pool.push(ore_compose_traced(&e, xy, &v, z, &to_x, &to_y)?);
    }
    Ok(pool.pop().unwrap())
}

/// Outcome of [`recognize_k_ore`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Recognition {
    KOre { trace: OreTrace },
    NotKOre,
    BudgetExhausted { budget: u64 },
}

impl Recognition {
    pub fn is_k_ore(&self) -> Option<bool> {
        match self {
            Recognition::KOre { .. } => Some(true),
            Recognition::NotKOre => Some(false),
            Recognition::BudgetExhausted { .. } => None,
        }
    }
}

/// Decide whether `g` is `k`-Ore by splitting along nonadjacent 2-cuts.
///
/// For a cut `{x, y}` and a split of the components of `G - x - y` into `A`
/// and `B`, the edge side is `G[A + x + y] + xy` and the vertex side is
/// `G[B + x + y]` with `x` and `y` identified. Both sides are recognised
/// recursively, memoised on canonical form.
pub fn recognize_k_ore(g: &Graph, k: usize, budget: u64) -> Result<Recognition, OreError> {
    if k < 3 {
        return Err(OreError::BadK(k));
    }
    let mut r = Recognizer { k, budget, used: 0, memo: HashMap::new() };
    match r.rec(g) {
        Ok(Some(trace)) => {
            debug_assert_eq!(trace.replay().as_ref(), Ok(g));
            Ok(Recognition::KOre { trace })
        }
        Ok(None) => Ok(Recognition::NotKOre),
        Err(()) => Ok(Recognition::BudgetExhausted { budget }),
    }
}

/// `true`, `false`, or an error if the budget ran out.
pub fn is_k_ore(g: &Graph, k: usize) -> Result<bool, OreError> {
    match recognize_k_ore(g, k, RECOGNITION_BUDGET)? {
        Recognition::KOre { .. } => Ok(true),
        Recognition::NotKOre => Ok(false),
        Recognition::BudgetExhausted { budget } => Err(OreError::BudgetExhausted(budget)),
    }
}

struct Recognizer {
    k: usize,
    budget: u64,
    used: u64,
    memo: HashMap<Graph, Option<OreTrace>>,
}

impl Recognizer {
    fn tick(&mut self) -> Result<(), ()> {
        self.used += 1;
        if self.used > self.budget {
            Err(())
        } else {
            Ok(())
        }
    }

    fn plausible(&self, n: usize, m: usize) -> bool {
        let k = self.k;
        n >= k
            && (n - k).is_multiple_of(k - 1)
            && ((k - 2) * (k + 1) * n) as i64 - (2 * (k - 1) * m) as i64 == (k * (k - 3)) as i64
    }

    fn rec(&mut self, g: &Graph) -> Result<Option<OreTrace>, ()> {
        if !self.plausible(g.n(), g.edge_count()) || g.min_degree() + 1 < self.k {
            return Ok(None);
        }
        let lab = canonical_labeling(g);
        let cg = g.permute(&lab);
        let mut inv = vec![0; lab.len()];
        for (v, &c) in lab.iter().enumerate() {
            inv[c] = v;
        }
        let res = match self.memo.get(&cg) {
            Some(r) => r.clone(),
            None => {
                let r = self.solve(&cg)?;
                self.memo.insert(cg, r.clone());
                r
            }
        };
        Ok(res.map(|t| t.relabel(&inv)))
    }

    fn solve(&mut self, g: &Graph) -> Result<Option<OreTrace>, ()> {
        self.tick()?;
        let (n, k) = (g.n(), self.k);
        if n == k {
            return Ok((g.edge_count() == k * (k - 1) / 2).then_some(OreTrace::Leaf { k }));
        }
        if !g.is_connected() {
            return Ok(None);
        }
        for (x, y) in g.non_edges_colex() {
            let mut cut = VertexSet::new();
            cut.insert(x);
            cut.insert(y);
            let rest = g.vertices().difference(&cut);
            let comps = g.components_within(&rest);
            if comps.len() < 2 || comps.len() > 20 {
                continue;
            }
            for mask in 1u32..(1 << comps.len()) - 1 {
                self.tick()?;
                let mut a = VertexSet::new();
                for (i, c) in comps.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        a = a.union(c);
                    }
                }
                let b = rest.difference(&a);
                if let Some(t) = self.try_split(g, x, y, &a, &b)? {
                    return Ok(Some(t));
                }
            }
        }
        Ok(None)
    }

    fn try_split(
        &mut self,
        g: &Graph,
        x: usize,
        y: usize,
        a: &VertexSet,
        b: &VertexSet,
    ) -> Result<Option<OreTrace>, ()> {
        let k = self.k;
        let nx = g.neighbors(x).intersection(b);
        let ny = g.neighbors(y).intersection(b);
        if nx.is_empty() || ny.is_empty() || !nx.is_disjoint(&ny) {
            return Ok(None);
        }
        let n1 = a.len() + 2;
        let n2 = b.len() + 1;
        if n1 < k || n2 < k || !(n1 - k).is_multiple_of(k - 1) || !(n2 - k).is_multiple_of(k - 1) {
            return Ok(None);
        }
        let mut s1 = *a;
        s1.insert(x);
        s1.insert(y);
        let (mut g1, lab1) = g.induced_subgraph(&s1);
        let px = lab1.iter().position(|&v| v == x).unwrap();
        let py = lab1.iter().position(|&v| v == y).unwrap();
        g1.add_edge(px, py);
        let mut s2 = *b;
        s2.insert(x);
        let (mut g2, lab2) = g.induced_subgraph(&s2);
        let pz = lab2.iter().position(|&v| v == x).unwrap();
        let pos2 = |v: usize| lab2.iter().position(|&w| w == v).unwrap();
        for w in ny.iter() {
            g2.add_edge(pz, pos2(w));
        }
        if !self.plausible(g1.n(), g1.edge_count()) || !self.plausible(g2.n(), g2.edge_count()) {
            return Ok(None);
        }
        let Some(t1) = self.rec(&g1)? else { return Ok(None) };
        let Some(t2) = self.rec(&g2)? else { return Ok(None) };
        let node = OreNode {
            edge_side: t1,
            vertex_side: t2,
            replaced_edge: [px, py],
            split_vertex: pz,
            to_x: nx.iter().map(pos2).collect(),
            to_y: ny.iter().map(pos2).collect(),
            edge_side_map: lab1,
            vertex_side_map: lab2.iter().map(|&v| (v != x).then_some(v)).collect(),
        };
        Ok(Some(OreTrace::Node(Box::new(node))))
    }
}

/// `G[h]` with `a` and `b` identified is `k`-Ore, and `a`, `b` have no common
/// neighbour in `h` (so the identification undoes a split).
pub fn is_split_k_ore(g: &Graph, h: &VertexSet, a: usize, b: usize, k: usize) -> Result<bool, OreError> {
    is_split_k_ore_with_budget(g, h, a, b, k, RECOGNITION_BUDGET)
}

pub fn is_split_k_ore_with_budget(
    g: &Graph,
    h: &VertexSet,
    a: usize,
    b: usize,
    k: usize,
    budget: u64,
) -> Result<bool, OreError> {
    g.check_set(h)?;
    if !h.contains(a) || !h.contains(b) || a == b {
        return Err(OreError::BadSplitPair(a, b, "not two distinct vertices of h"));
    }
    if g.has_edge(a, b) {
        return Err(OreError::BadSplitPair(a, b, "adjacent"));
    }
    let na = g.neighbors(a).intersection(h);
    let nb = g.neighbors(b).intersection(h);
    if na.is_empty() || nb.is_empty() {
        return Err(OreError::BadSplitPair(a, b, "degree 0 in h"));
    }
    if !na.is_disjoint(&nb) {
        return Ok(false);
    }
    let (sub, lab) = g.induced_subgraph(h);
    let pa = lab.iter().position(|&v| v == a).unwrap();
    let pb = lab.iter().position(|&v| v == b).unwrap();
    let merged = sub.identify_vertices(pa, pb, LoopPolicy::Reject)?;
    match recognize_k_ore(&merged, k, budget)? {
        Recognition::KOre { .. } => Ok(true),
        Recognition::NotKOre => Ok(false),
        Recognition::BudgetExhausted { budget } => Err(OreError::BudgetExhausted(budget)),
    }
}

/// A pair of frame vertices joined through a split `k`-Ore subgraph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Replacement {
    pub u: usize,
    pub v: usize,
    /// Vertex set of the split subgraph, `u` and `v` included.
    pub vertices: Vec<usize>,
}

impl Replacement {
    pub fn interior(&self) -> VertexSet {
        let mut s = VertexSet::from_slice(&self.vertices);
        s.remove(self.u);
        s.remove(self.v);
        s
    }
}

/// `k` vertices, each pair a real edge or a [`Replacement`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub vertices: Vec<usize>,
    pub replacements: Vec<Replacement>,
}

impl Frame {
    /// Structural checks plus a split-Ore certificate check for every
    /// replacement.
    pub fn validate(&self, g: &Graph, k: usize) -> Result<(), OreError> {
        let fv = VertexSet::from_slice(&self.vertices);
        let bad = |m: String| Err(OreError::BadTrace(m));
        if fv.len() != k || self.vertices.len() != k {
            return bad(format!("frame has {} vertices, want {k}", fv.len()));
        }
        g.check_set(&fv)?;
        let mut used = fv;
        for r in &self.replacements {
            if !fv.contains(r.u) || !fv.contains(r.v) {
                return bad(format!("replacement ({}, {}) leaves the frame", r.u, r.v));
            }
            let inner = r.interior();
            if !inner.is_disjoint(&used) {
                return bad(format!("replacement ({}, {}) overlaps another", r.u, r.v));
            }
            used = used.union(&inner);
            if !is_split_k_ore(g, &VertexSet::from_slice(&r.vertices), r.u, r.v, k)? {
                return bad(format!("replacement ({}, {}) is not split {k}-Ore", r.u, r.v));
            }
        }
        for (i, &a) in self.vertices.iter().enumerate() {
            for &b in &self.vertices[i + 1..] {
                let rep = self.replacements.iter().filter(|r| (r.u, r.v) == (a.min(b), a.max(b))).count();
                match (g.has_edge(a, b), rep) {
                    (true, 0) | (false, 1) => {}
                    _ => return bad(format!("pair ({a}, {b}) is neither a real nor a replacement edge")),
                }
            }
        }
        Ok(())
    }
}

/// The frame obtained by following `trace` (which must replay to `g`): the
/// frame of the edge side carries over, and the replaced edge becomes a
/// replacement edge (or grows the replacement it sat in).
pub fn find_frame(g: &Graph, trace: &OreTrace) -> Result<Frame, OreError> {
    if trace.replay()? != *g {
        return Err(OreError::BadTrace("trace does not replay to the graph".into()));
    }
    let mut f = frame_of(trace)?;
    f.vertices.sort_unstable();
    f.replacements.sort_by_key(|r| (r.u, r.v));
    Ok(f)
}

fn frame_of(trace: &OreTrace) -> Result<Frame, OreError> {
    match trace {
        OreTrace::Leaf { k } => Ok(Frame { vertices: (0..*k).collect(), replacements: Vec::new() }),
        OreTrace::Node(nd) => {
            let inner = frame_of(&nd.edge_side)?;
            let m1 = &nd.edge_side_map;
            let mut f = Frame {
                vertices: inner.vertices.iter().map(|&v| m1[v]).collect(),
                replacements: inner
                    .replacements
                    .iter()
                    .map(|r| {
                        let (u, v) = (m1[r.u], m1[r.v]);
                        Replacement { u: u.min(v), v: u.max(v), vertices: r.vertices.iter().map(|&w| m1[w]).collect() }
                    })
                    .collect(),
            };
            let interior2: Vec<usize> = nd.vertex_side_map.iter().flatten().copied().collect();
            let (x, y) = (m1[nd.replaced_edge[0]], m1[nd.replaced_edge[1]]);
            if f.vertices.contains(&x) && f.vertices.contains(&y) {
                let mut vs = vec![x, y];
                vs.extend(&interior2);
                vs.sort_unstable();
                f.replacements.push(Replacement { u: x.min(y), v: x.max(y), vertices: vs });
            } else {
                let r = f
                    .replacements
                    .iter_mut()
                    .find(|r| r.vertices.contains(&x) && r.vertices.contains(&y))
                    .ok_or_else(|| OreError::BadTrace("replaced edge lies outside the frame".into()))?;
                r.vertices.extend(&interior2);
                r.vertices.sort_unstable();
            }
            Ok(f)
        }
    }
}
