//! Local structure detectors: gems, clusters, cloning, low-degree subgraphs,
//! proto-gadgets and kites, neighbour direction, and lemma-conclusion checks
//! on supplied instances.

use crate::coloring::is_critical;
use crate::extension::{find_i_edge_addition, EdgeAdditionOutcome, ExtensionCaps};
use crate::graph::{Graph, GraphError, LoopPolicy, VertexSet};
use crate::ore::{recognize_k_ore, Recognition, Replacement, RECOGNITION_BUDGET};
use crate::potential::{potential, PotentialError, PotentialParams, SCHEMA_VERSION};
use crate::rational;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

fn pre(msg: impl Into<String>) -> StructureError {
    StructureError::Precondition(msg.into())
}

// ---------------------------------------------------------------- gems

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GemKind {
    /// `K_k` minus the edge `uv`.
    Diamond { u: usize, v: usize },
    /// `K_{k-1}`.
    Emerald,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Gem {
    pub kind: GemKind,
    pub vertices: Vec<usize>,
}

impl Gem {
    /// Diamond: `G[D] = K_k - uv` and every vertex other than `u`, `v` has
    /// degree `k-1`. Emerald: `G[D] = K_{k-1}` with all degrees `k-1`.
    pub fn validate(&self, g: &Graph, k: usize) -> Result<(), StructureError> {
        let d = VertexSet::from_slice(&self.vertices);
        g.check_set(&d)?;
        let bad = |why: &str| Err(StructureError::Invalid { what: "gem", why: why.to_string() });
        if d.len() != self.vertices.len() {
            return bad("repeated vertex");
        }
        match self.kind {
            GemKind::Emerald => {
                if d.len() + 1 != k || !g.is_clique(&d) {
                    return bad("not a (k-1)-clique");
                }
                if d.iter().any(|x| g.degree(x) + 1 != k) {
                    return bad("a vertex has degree other than k-1");
                }
            }
            GemKind::Diamond { u, v } => {
                if d.len() != k || !d.contains(u) || !d.contains(v) || u == v {
                    return bad("needs k vertices including both ends");
                }
                if g.has_edge(u, v) || g.edges_within(&d) != k * (k - 1) / 2 - 1 {
                    return bad("not K_k minus uv");
                }
                if d.iter().any(|x| x != u && x != v && g.degree(x) + 1 != k) {
                    return bad("an interior vertex has degree other than k-1");
                }
            }
        }
        Ok(())
    }
}

/// Every gem of `g`, sorted.
pub fn find_gems(g: &Graph, k: usize) -> Vec<Gem> {
    if k < 3 {
        return Vec::new();
    }
    let low: VertexSet = (0..g.n()).filter(|&v| g.degree(v) + 1 == k).collect();
    let mut out = Vec::new();
    // An emerald vertex has exactly one neighbour outside; a diamond interior
    // vertex has exactly the two ends outside.
    for_each_clique(g, low, k - 1, &mut |s| {
        out.push(Gem { kind: GemKind::Emerald, vertices: s.to_vec() });
        true
    });
    for_each_clique(g, low, k - 2, &mut |s| {
        let mut outside: Option<VertexSet> = None;
        for x in s.iter() {
            let o = g.neighbors(x).difference(&s);
            if o.len() != 2 || outside.is_some_and(|p| p != o) {
                return true;
            }
            outside = Some(o);
        }
        if let Some(o) = outside {
            let ends = o.to_vec();
            if !g.has_edge(ends[0], ends[1]) {
                out.push(Gem { kind: GemKind::Diamond { u: ends[0], v: ends[1] }, vertices: s.union(&o).to_vec() });
            }
        }
        true
    });
    out.sort();
    out
}

/// Cliques of `size` inside `cand`, in lexicographic order. The callback
/// returns `false` to stop.
fn for_each_clique(g: &Graph, cand: VertexSet, size: usize, f: &mut dyn FnMut(VertexSet) -> bool) {
    fn rec(g: &Graph, cur: &mut VertexSet, cand: VertexSet, need: usize, f: &mut dyn FnMut(VertexSet) -> bool) -> bool {
        if need == 0 {
            return f(*cur);
        }
        if cand.len() < need {
            return true;
        }
        let mut rest = cand;
        for v in cand.iter() {
            rest.remove(v);
            if rest.len() + 1 < need {
                break;
            }
            cur.insert(v);
            let go = rec(g, cur, rest.intersection(g.neighbors(v)), need - 1, f);
            cur.remove(v);
            if !go {
                return false;
            }
        }
        true
    }
    if size == 0 {
        f(VertexSet::new());
        return;
    }
    rec(g, &mut VertexSet::new(), cand, size, f);
}

// ---------------------------------------------------------------- clusters

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cluster {
    pub vertices: Vec<usize>,
}

impl Cluster {
    pub fn set(&self) -> VertexSet {
        VertexSet::from_slice(&self.vertices)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Nonempty, degrees `k-1`, one shared closed neighbourhood, maximal.
    pub fn validate(&self, g: &Graph, k: usize) -> Result<(), StructureError> {
        let s = self.set();
        g.check_set(&s)?;
        let bad = |why: &str| Err(StructureError::Invalid { what: "cluster", why: why.to_string() });
        let Some(first) = s.first() else { return bad("empty") };
        let nb = g.closed_neighbors(first);
        if s.iter().any(|x| g.degree(x) + 1 != k || g.closed_neighbors(x) != nb) {
            return bad("members differ in degree or closed neighbourhood");
        }
        if (0..g.n()).any(|x| !s.contains(x) && g.degree(x) + 1 == k && g.closed_neighbors(x) == nb) {
            return bad("not maximal");
        }
        Ok(())
    }
}

/// Partition of the degree-`(k-1)` vertices by closed neighbourhood, ordered
/// by least member.
pub fn find_clusters(g: &Graph, k: usize) -> Vec<Cluster> {
    let mut by_nb: Vec<(VertexSet, Vec<usize>)> = Vec::new();
    for v in 0..g.n() {
        if g.degree(v) + 1 != k {
            continue;
        }
        let nb = g.closed_neighbors(v);
        match by_nb.iter_mut().find(|(n, _)| *n == nb) {
            Some((_, c)) => c.push(v),
            None => by_nb.push((nb, vec![v])),
        }
    }
    by_nb.into_iter().map(|(_, vertices)| Cluster { vertices }).collect()
}

/// The cluster containing `x`, if `x` has degree `k-1`.
pub fn cluster_of(g: &Graph, k: usize, x: usize) -> Option<Cluster> {
    if x >= g.n() || g.degree(x) + 1 != k {
        return None;
    }
    let nb = g.closed_neighbors(x);
    let vertices = nb.iter().filter(|&w| g.degree(w) + 1 == k && g.closed_neighbors(w) == nb).collect();
    Some(Cluster { vertices })
}

// ---------------------------------------------------------------- cloning

/// Cloning `x` with `y`: delete `y` and add a twin of `x` adjacent to
/// `N(x) - y` and to `x`. The twin takes the label `y`.
pub fn clone_vertex(g: &Graph, x: usize, y: usize, k: usize) -> Result<Graph, StructureError> {
    if x >= g.n() || y >= g.n() {
        return Err(GraphError::VertexOutOfRange { v: x.max(y), n: g.n() }.into());
    }
    if !g.has_edge(x, y) {
        return Err(pre(format!("{x} and {y} are not adjacent")));
    }
    if g.degree(x) + 1 != k {
        return Err(pre(format!("vertex {x} has degree {}, not {}", g.degree(x), k - 1)));
    }
    let mut h = g.clone();
    for w in g.neighbors(y).iter() {
        h.remove_edge(y, w);
    }
    for w in g.neighbors(x).iter() {
        if w != y {
            h.add_edge(y, w);
        }
    }
    h.add_edge(x, y);
    Ok(h)
}

/// Cloning a cluster with a neighbour `y`: clones its least member.
pub fn clone_cluster(g: &Graph, cluster: &Cluster, y: usize, k: usize) -> Result<Graph, StructureError> {
    cluster.validate(g, k)?;
    let x = cluster.vertices.iter().copied().min().ok_or_else(|| pre("empty cluster"))?;
    if cluster.set().contains(y) {
        return Err(pre(format!("{y} belongs to the cluster")));
    }
    clone_vertex(g, x, y, k)
}

/// `D_i(G)`: the subgraph induced by the degree-`i` vertices, with host labels.
pub fn degree_subgraph(g: &Graph, i: usize) -> (Graph, Vec<usize>) {
    let s: VertexSet = (0..g.n()).filter(|&v| g.degree(v) == i).collect();
    g.induced_subgraph(&s)
}

// ---------------------------------------------------------------- D_{k-1} shapes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum D5Shape {
    Singleton,
    /// Induced path on three vertices.
    InducedPath2,
    ClusterPair,
    ClusterPairPlusVertexTriangle,
    PlainEdge,
    PlainTriangle,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct D5Component {
    pub vertices: Vec<usize>,
    pub shape: D5Shape,
}

/// Components of `D_{k-1}(G)` with their shapes, ordered by least vertex.
pub fn classify_low_degree_components(g: &Graph, k: usize) -> Vec<D5Component> {
    let low: VertexSet = (0..g.n()).filter(|&v| g.degree(v) + 1 == k).collect();
    let same = |a: usize, b: usize| g.closed_neighbors(a) == g.closed_neighbors(b);
    g.components_within(&low)
        .into_iter()
        .map(|c| {
            let vs = c.to_vec();
            let e = g.edges_within(&c);
            let shape = match (vs.len(), e) {
                (1, _) => D5Shape::Singleton,
                (2, 1) if same(vs[0], vs[1]) => D5Shape::ClusterPair,
                (2, 1) => D5Shape::PlainEdge,
                (3, 2) => D5Shape::InducedPath2,
                (3, 3) => {
                    let pairs = [(0, 1), (0, 2), (1, 2)].iter().filter(|&&(i, j)| same(vs[i], vs[j])).count();
                    match pairs {
                        0 => D5Shape::PlainTriangle,
                        1 => D5Shape::ClusterPairPlusVertexTriangle,
                        _ => D5Shape::Other,
                    }
                }
                _ => D5Shape::Other,
            };
            D5Component { vertices: vs, shape }
        })
        .collect()
}

/// [`classify_low_degree_components`] for `k = 6`.
pub fn classify_d5(g: &Graph) -> Vec<D5Component> {
    classify_low_degree_components(g, 6)
}

// ---------------------------------------------------------------- proto-gadgets

/// Limits for certificate and proto-gadget search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCaps {
    /// Largest certificate interior examined.
    pub max_interior: usize,
    /// Candidate interiors and frames examined before giving up.
    pub max_candidates: usize,
    pub recognition_budget: u64,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps { max_interior: 9, max_candidates: 100_000, recognition_budget: RECOGNITION_BUDGET }
    }
}

impl SearchCaps {
    /// Multiply the count limits; the interior size is left alone.
    pub fn scaled(self, factor: u64) -> Self {
        SearchCaps {
            max_interior: self.max_interior,
            max_candidates: self.max_candidates.saturating_mul(factor as usize),
            recognition_budget: self.recognition_budget.saturating_mul(factor),
        }
    }
}

/// A frame of `frame_size` vertices in which each pair is a real edge or is
/// joined through a split `k`-Ore subgraph. Size `k-1` is a proto-gadget,
/// size `k-2` a kite.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProtoGadget {
    pub frame: Vec<usize>,
    pub replacements: Vec<Replacement>,
}

impl ProtoGadget {
    pub fn frame_set(&self) -> VertexSet {
        VertexSet::from_slice(&self.frame)
    }

    /// All vertices, frame and interiors.
    pub fn vertex_set(&self) -> VertexSet {
        self.replacements.iter().fold(self.frame_set(), |acc, r| acc.union(&VertexSet::from_slice(&r.vertices)))
    }

    /// Frame size, pair coverage, disjoint interiors and a split-Ore check on
    /// every replacement.
    pub fn validate(&self, g: &Graph, k: usize, frame_size: usize) -> Result<(), StructureError> {
        let f = self.frame_set();
        g.check_set(&f)?;
        let bad = |why: String| Err(StructureError::Invalid { what: "proto-gadget", why });
        if f.len() != frame_size || self.frame.len() != frame_size {
            return bad(format!("frame has {} vertices, want {frame_size}", f.len()));
        }
        let mut used = f;
        for r in &self.replacements {
            if !f.contains(r.u) || !f.contains(r.v) || r.u >= r.v {
                return bad(format!("replacement ({}, {}) is not an ordered frame pair", r.u, r.v));
            }
            let inner = r.interior();
            if !inner.is_disjoint(&used) {
                return bad(format!("replacement ({}, {}) overlaps", r.u, r.v));
            }
            used = used.union(&inner);
            let h = VertexSet::from_slice(&r.vertices);
            match crate::ore::is_split_k_ore(g, &h, r.u, r.v, k) {
                Ok(true) => {}
                Ok(false) => return bad(format!("replacement ({}, {}) is not split {k}-Ore", r.u, r.v)),
                Err(e) => return bad(e.to_string()),
            }
        }
        for (i, &a) in self.frame.iter().enumerate() {
            for &b in &self.frame[i + 1..] {
                let (a, b) = (a.min(b), a.max(b));
                let rep = self.replacements.iter().filter(|r| (r.u, r.v) == (a, b)).count();
                if !matches!((g.has_edge(a, b), rep), (true, 0) | (false, 1)) {
                    return bad(format!("pair ({a}, {b}) is neither real nor replaced"));
                }
            }
        }
        Ok(())
    }
}

/// Results of a capped search; `incomplete` is set when a cap bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSearch {
    pub frame_size: usize,
    pub gadgets: Vec<ProtoGadget>,
    pub incomplete: bool,
}

/// Split `k`-Ore certificates for every nonadjacent pair, precomputed once
/// per graph, and frame search on top of them.
pub struct GadgetFinder<'a> {
    g: &'a Graph,
    k: usize,
    caps: SearchCaps,
    certs: HashMap<(usize, usize), Vec<VertexSet>>,
    plus: Graph,
    incomplete: bool,
}

impl<'a> GadgetFinder<'a> {
    pub fn new(g: &'a Graph, k: usize, caps: SearchCaps) -> Self {
        let mut f = GadgetFinder { g, k, caps, certs: HashMap::new(), plus: g.clone(), incomplete: false };
        if k >= 3 {
            f.collect_certificates();
        }
        f
    }

    pub fn graph(&self) -> &Graph {
        self.g
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Whether certificate collection hit a cap.
    pub fn incomplete(&self) -> bool {
        self.incomplete
    }

    /// Certificate interiors found for the pair, in discovery order.
    pub fn certificates(&self, u: usize, v: usize) -> &[VertexSet] {
        self.certs.get(&(u.min(v), u.max(v))).map(|c| c.as_slice()).unwrap_or(&[])
    }

    /// Every certified split subgraph as `(a, b, vertices)`.
    pub fn split_subgraphs(&self) -> Vec<Replacement> {
        let mut out: Vec<Replacement> = self
            .certs
            .iter()
            .flat_map(|(&(u, v), list)| {
                list.iter().map(move |s| {
                    let mut all = *s;
                    all.insert(u);
                    all.insert(v);
                    Replacement { u, v, vertices: all.to_vec() }
                })
            })
            .collect();
        out.sort_by(|a, b| (a.u, a.v, &a.vertices).cmp(&(b.u, b.v, &b.vertices)));
        out
    }

    fn collect_certificates(&mut self) {
        let (g, k) = (self.g, self.k);
        let n = g.n();
        let mut budget = self.caps.max_candidates;
        let sizes: Vec<usize> = (1..).map(|m| m * (k - 1)).take_while(|&s| s + 2 <= n).collect();
        if sizes.iter().any(|&s| s > self.caps.max_interior) {
            self.incomplete = true;
        }
        let usable: VertexSet = (0..n).filter(|&v| g.degree(v) + 1 >= k).collect();
        for (u, v) in g.non_edges_colex() {
            let (u, v) = (u.min(v), u.max(v));
            let nu = *g.neighbors(u);
            let nv = *g.neighbors(v);
            let mut found = Vec::new();
            // Smallest certificates: a (k-1)-clique split between N(u) and N(v).
            let cand = nu.union(&nv).difference(&nu.intersection(&nv)).intersection(&usable);
            let mut stop = false;
            for_each_clique(g, cand, k - 1, &mut |s| {
                if budget == 0 {
                    stop = true;
                    return false;
                }
                budget -= 1;
                if !s.is_disjoint(&nu) && !s.is_disjoint(&nv) {
                    found.push(s);
                }
                true
            });
            for &size in sizes.iter().skip(1) {
                if size > self.caps.max_interior || stop {
                    break;
                }
                let allowed = usable.difference(&nu.intersection(&nv));
                let mut allowed = allowed;
                allowed.remove(u);
                allowed.remove(v);
                let recog = self.caps.recognition_budget;
                let mut exhausted = false;
                connected_sets(g, allowed, size, &mut |s| {
                    if budget == 0 {
                        stop = true;
                        return false;
                    }
                    budget -= 1;
                    if s.is_disjoint(&nu) || s.is_disjoint(&nv) {
                        return true;
                    }
                    match split_ore_check(g, &s, u, v, k, recog) {
                        Some(true) => found.push(s),
                        Some(false) => {}
                        None => exhausted = true,
                    }
                    true
                });
                if exhausted {
                    self.incomplete = true;
                }
            }
            if stop {
                self.incomplete = true;
            }
            if !found.is_empty() {
                self.plus.add_edge(u, v);
                self.certs.insert((u, v), found);
            }
            if stop {
                break;
            }
        }
    }

    /// Frames of `frame_size` containing all of `must` and none of `avoid`,
    /// each with one certified assignment. At most `limit` are returned.
    pub fn search(&self, frame_size: usize, must: &VertexSet, avoid: &VertexSet, limit: usize) -> GadgetSearch {
        let mut out = Vec::new();
        let mut incomplete = self.incomplete;
        let mut seen = 0usize;
        let mut cand = self.g.vertices().difference(avoid).difference(must);
        for m in must.iter() {
            cand = cand.intersection(self.plus.neighbors(m));
        }
        if must.iter().any(|a| must.iter().any(|b| a < b && !self.plus.has_edge(a, b))) || must.len() > frame_size {
            return GadgetSearch { frame_size, gadgets: out, incomplete };
        }
        let caps = self.caps;
        for_each_clique(&self.plus, cand, frame_size - must.len(), &mut |s| {
            if seen >= caps.max_candidates {
                incomplete = true;
                return false;
            }
            seen += 1;
            let frame = s.union(must);
            if let Some(gd) = self.assign(&frame) {
                out.push(gd);
                if out.len() >= limit {
                    return false;
                }
            }
            true
        });
        out.sort();
        GadgetSearch { frame_size, gadgets: out, incomplete }
    }

    /// All frames of the given size.
    pub fn all(&self, frame_size: usize) -> GadgetSearch {
        self.search(frame_size, &VertexSet::new(), &VertexSet::new(), usize::MAX)
    }

    /// Pick pairwise disjoint certificates for the non-edges of `frame`.
    fn assign(&self, frame: &VertexSet) -> Option<ProtoGadget> {
        let fv = frame.to_vec();
        let mut pairs = Vec::new();
        for (i, &a) in fv.iter().enumerate() {
            for &b in &fv[i + 1..] {
                if !self.g.has_edge(a, b) {
                    let opts: Vec<VertexSet> =
                        self.certificates(a, b).iter().filter(|s| s.is_disjoint(frame)).copied().collect();
                    if opts.is_empty() {
                        return None;
                    }
                    pairs.push((a, b, opts));
                }
            }
        }
        // fewest options first
        pairs.sort_by_key(|p| p.2.len());
        fn go(pairs: &[(usize, usize, Vec<VertexSet>)], used: VertexSet, pick: &mut Vec<VertexSet>) -> bool {
            let Some((_, _, opts)) = pairs.first() else { return true };
            for s in opts {
                if s.is_disjoint(&used) {
                    pick.push(*s);
                    if go(&pairs[1..], used.union(s), pick) {
                        return true;
                    }
                    pick.pop();
                }
            }
            false
        }
        let mut pick = Vec::new();
        if !go(&pairs, VertexSet::new(), &mut pick) {
            return None;
        }
        let mut replacements: Vec<Replacement> = pairs
            .iter()
            .zip(&pick)
            .map(|((a, b, _), s)| {
                let mut all = *s;
                all.insert(*a);
                all.insert(*b);
                Replacement { u: *a, v: *b, vertices: all.to_vec() }
            })
            .collect();
        replacements.sort_by_key(|r| (r.u, r.v));
        Some(ProtoGadget { frame: fv, replacements })
    }

    /// Direction of the pair `(x, y)`; see [`classify_neighbor_direction`].
    pub fn direction(&self, x: usize, y: usize) -> NeighborDirection {
        let (g, k) = (self.g, self.k);
        if x >= g.n() || y >= g.n() || !g.has_edge(x, y) {
            return NeighborDirection::Inapplicable;
        }
        if g.degree(x) + 1 != k || !(g.degree(y) == k || g.degree(y) == k + 1) {
            return NeighborDirection::Inapplicable;
        }
        let mut must = VertexSet::new();
        must.insert(x);
        let mut avoid = VertexSet::new();
        avoid.insert(y);
        let res = self.search(k - 1, &must, &avoid, 1);
        match res.gadgets.into_iter().next() {
            Some(witness) => NeighborDirection::Downward { witness },
            None => NeighborDirection::Upward { search_incomplete: res.incomplete },
        }
    }
}

/// Is `G[s + u + v]` with `u`, `v` identified `k`-Ore? `None` if recognition
/// ran out of budget.
fn split_ore_check(g: &Graph, s: &VertexSet, u: usize, v: usize, k: usize, budget: u64) -> Option<bool> {
    let nu = g.neighbors(u).intersection(s).len();
    let nv = g.neighbors(v).intersection(s).len();
    let n1 = (s.len() + 1) as i64;
    let e1 = (g.edges_within(s) + nu + nv) as i64;
    let k = k as i64;
    if (k - 2) * (k + 1) * n1 - 2 * (k - 1) * e1 != k * (k - 3) {
        return Some(false);
    }
    let mut h = *s;
    h.insert(u);
    h.insert(v);
    let (sub, lab) = g.induced_subgraph(&h);
    let pu = lab.iter().position(|&w| w == u)?;
    let pv = lab.iter().position(|&w| w == v)?;
    let merged = sub.identify_vertices(pu, pv, LoopPolicy::Reject).ok()?;
    match recognize_k_ore(&merged, k as usize, budget) {
        Ok(Recognition::KOre { .. }) => Some(true),
        Ok(Recognition::NotKOre) => Some(false),
        _ => None,
    }
}

/// Connected vertex sets of exactly `size` inside `allowed`, each once.
fn connected_sets(g: &Graph, allowed: VertexSet, size: usize, f: &mut dyn FnMut(VertexSet) -> bool) {
    fn extend(
        g: &Graph,
        allowed: &VertexSet,
        root: usize,
        sub: VertexSet,
        nsub: VertexSet,
        mut ext: VertexSet,
        size: usize,
        f: &mut dyn FnMut(VertexSet) -> bool,
    ) -> bool {
        if sub.len() == size {
            return f(sub);
        }
        while let Some(w) = ext.first() {
            ext.remove(w);
            let mut fresh = g.neighbors(w).intersection(allowed).difference(&sub).difference(&nsub);
            for x in fresh.iter() {
                if x <= root {
                    fresh.remove(x);
                }
            }
            let mut s2 = sub;
            s2.insert(w);
            let n2 = nsub.union(g.neighbors(w));
            if !extend(g, allowed, root, s2, n2, ext.union(&fresh), size, f) {
                return false;
            }
        }
        true
    }
    for v in allowed.iter() {
        let mut ext = g.neighbors(v).intersection(&allowed);
        for x in ext.iter() {
            if x <= v {
                ext.remove(x);
            }
        }
        let mut sub = VertexSet::new();
        sub.insert(v);
        let mut nsub = *g.neighbors(v);
        nsub.insert(v);
        if !extend(g, &allowed, v, sub, nsub, ext, size, f) {
            return;
        }
    }
}

/// Proto-gadgets (`frame_size = k-1`) or kites (`k-2`) of `g`.
pub fn find_proto_gadgets(g: &Graph, k: usize, frame_size: usize, caps: SearchCaps) -> GadgetSearch {
    GadgetFinder::new(g, k, caps).all(frame_size)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "direction", rename_all = "snake_case")]
pub enum NeighborDirection {
    /// A proto-gadget has `x` in its frame and `y` outside it.
    Downward { witness: ProtoGadget },
    /// No such proto-gadget was found.
    Upward { search_incomplete: bool },
    /// Degrees or adjacency do not fit.
    Inapplicable,
}

/// Direction of `x` (degree `k-1`) relative to its neighbour `y` (degree `k`
/// or `k+1`).
pub fn classify_neighbor_direction(g: &Graph, k: usize, x: usize, y: usize, caps: SearchCaps) -> NeighborDirection {
    GadgetFinder::new(g, k, caps).direction(x, y)
}

// ---------------------------------------------------------------- tightness

/// `G` is critical, has no gem, and `p(G)` exceeds the `i`-th threshold.
/// Goodness is taken as given.
pub fn is_tight_ungemmed(g: &Graph, params: &PotentialParams, i: u32) -> Result<bool, StructureError> {
    let k = params.k;
    if !find_gems(g, k).is_empty() || !is_critical(g, k) {
        return Ok(false);
    }
    Ok(potential(g, params)? > params.tight_threshold(i))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Dangling {
    Dangles {
        kite: ProtoGadget,
    },
    No {
        reason: String,
    },
    /// A kite search hit a cap without finding one.
    Unknown,
}

/// Does `x` dangle from `y`? Both have degree `k-1`, are adjacent and lie in
/// different clusters; cloning `y` with `x` gives a 2-tight ungemmed graph;
/// and a kite has `x` as its only degree-`(k-1)` frame vertex, avoids `y`, and
/// its degree-`k` frame vertices miss `y`.
pub fn dangles_from(
    g: &Graph,
    x: usize,
    y: usize,
    params: &PotentialParams,
    finder: &GadgetFinder,
) -> Result<Dangling, StructureError> {
    let k = params.k;
    let low = |v: usize| g.degree(v) + 1 == k;
    if !g.has_edge(x, y) || !low(x) || !low(y) {
        return Ok(Dangling::No { reason: "not adjacent degree-(k-1) vertices".into() });
    }
    if g.closed_neighbors(x) == g.closed_neighbors(y) {
        return Ok(Dangling::No { reason: "same cluster".into() });
    }
    let clone = clone_vertex(g, y, x, k)?;
    if !is_tight_ungemmed(&clone, params, 2)? {
        return Ok(Dangling::No { reason: "clone is not 2-tight and ungemmed".into() });
    }
    let mut must = VertexSet::new();
    must.insert(x);
    let mut avoid: VertexSet = (0..g.n()).filter(|&v| v != x && low(v)).collect();
    avoid.insert(y);
    for w in g.neighbors(y).iter() {
        if g.degree(w) == k {
            avoid.insert(w);
        }
    }
    let res = finder.search(k - 2, &must, &avoid, usize::MAX);
    for kite in res.gadgets {
        if !kite.vertex_set().contains(y) {
            return Ok(Dangling::Dangles { kite });
        }
    }
    Ok(if res.incomplete { Dangling::Unknown } else { Dangling::No { reason: "no kite".into() } })
}

// ---------------------------------------------------------------- lemma checks

/// Hypotheses a caller may claim for a graph; each is certified before any
/// dependent conclusion is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "hypothesis", rename_all = "snake_case")]
pub enum Hypothesis {
    /// Critical and no `i`-edge-addition.
    NoEdgeAdditions { i: usize },
    /// Critical, ungemmed, `p(G) > k(k-3) - P - Q + i delta`.
    TightUngemmed { i: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    #[serde(flatten)]
    pub hypothesis: Hypothesis,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaStatus {
    Pass,
    Fail,
    /// Some instance depended on a search that hit a cap.
    Inconclusive,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub hypothesis: String,
    pub status: LemmaStatus,
    /// Qualifying tuples examined.
    pub instances: usize,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl LemmaCheck {
    fn new(name: &str, hypothesis: &str) -> Self {
        LemmaCheck {
            name: name.into(),
            hypothesis: hypothesis.into(),
            status: LemmaStatus::Pass,
            instances: 0,
            failures: Vec::new(),
            note: None,
        }
    }

    fn skipped(name: &str, hypothesis: &str) -> Self {
        let mut c = Self::new(name, hypothesis);
        c.status = LemmaStatus::Skipped;
        c.note = Some("skipped (hypothesis unverified)".into());
        c
    }

    fn see(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures.push(what());
            self.status = LemmaStatus::Fail;
        }
    }

    fn unsure(&mut self, what: String) {
        self.instances += 1;
        if self.status == LemmaStatus::Pass {
            self.status = LemmaStatus::Inconclusive;
        }
        self.note.get_or_insert_with(String::new).push_str(&what);
    }
}

/// Adjacent `x`, `y` with `d(x) = k-1`, `d(y) <= k-2+i`, at least `k-3`
/// common neighbours: `N[x]` is inside `N[y]`.
pub fn check_common_neighbours(g: &Graph, k: usize, i: usize) -> LemmaCheck {
    let mut c = LemmaCheck::new("common-neighbours", &format!("no {i}-edge-addition"));
    for (a, b) in g.edges() {
        for (x, y) in [(a, b), (b, a)] {
            if g.degree(x) + 1 != k || g.degree(y) + 2 > k + i {
                continue;
            }
            if g.neighbors(x).intersection(g.neighbors(y)).len() + 3 < k {
                continue;
            }
            c.see(g.closed_neighbors(x).is_subset(&g.closed_neighbors(y)), || format!("N[{x}] not inside N[{y}]"));
        }
    }
    c
}

/// Every cluster has at most `k-4` vertices.
pub fn check_cluster_size(g: &Graph, k: usize) -> LemmaCheck {
    let mut c = LemmaCheck::new("cluster-size", "tight, ungemmed");
    for cl in find_clusters(g, k) {
        c.see(cl.len() + 4 <= k, || format!("cluster {:?} has {} vertices", cl.vertices, cl.len()));
    }
    c
}

/// No induced path on four vertices, all of degree `k-1`.
pub fn check_no_low_degree_p4(g: &Graph, k: usize) -> LemmaCheck {
    let mut c = LemmaCheck::new("no-low-degree-induced-p4", "tight, ungemmed");
    let low: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) + 1 == k).collect();
    for &b in &low {
        for &cc in &low {
            if b >= cc || !g.has_edge(b, cc) {
                continue;
            }
            for &a in &low {
                if a == cc || !g.has_edge(a, b) || g.has_edge(a, cc) {
                    continue;
                }
                for &d in &low {
                    if d == b || d == a || !g.has_edge(cc, d) || g.has_edge(b, d) || g.has_edge(a, d) {
                        continue;
                    }
                    c.see(false, || format!("induced path {a}-{b}-{cc}-{d}"));
                }
            }
            c.instances += 1;
        }
    }
    c
}

/// Every certified split subgraph on a proper vertex subset has both split
/// vertices of degree at least 3 inside it.
pub fn check_split_degrees(finder: &GadgetFinder) -> LemmaCheck {
    let g = finder.graph();
    let mut c = LemmaCheck::new("split-subgraph-degrees", "2-tight, ungemmed");
    for r in finder.split_subgraphs() {
        let h = VertexSet::from_slice(&r.vertices);
        if h.len() == g.n() {
            continue;
        }
        let (da, db) = (g.degree_in(r.u, &h), g.degree_in(r.v, &h));
        c.see(da >= 3 && db >= 3, || format!("split ({}, {}) on {:?} has degrees {da}, {db}", r.u, r.v, r.vertices));
    }
    if finder.incomplete() {
        c.note = Some("certificate search was capped; only found subgraphs are checked".into());
    }
    c
}

/// In each proto-gadget, a frame vertex of degree `k-1` meets no
/// replacement, one of degree `k` or `k+1` meets at most one, and any two
/// degree-`(k-1)` frame vertices share a cluster.
pub fn check_proto_gadget_frames(g: &Graph, k: usize, gadgets: &GadgetSearch) -> (LemmaCheck, LemmaCheck) {
    let mut rep = LemmaCheck::new("replacement-degree", "2-tight, ungemmed");
    let mut same = LemmaCheck::new("low-degree-frame-vertices-share-cluster", "2-tight, ungemmed");
    for h in &gadgets.gadgets {
        for &x in &h.frame {
            let d = g.degree(x);
            let touching = h.replacements.iter().filter(|r| r.u == x || r.v == x).count();
            if d + 1 == k {
                rep.see(touching == 0, || format!("{x} meets {touching} replacements in {:?}", h.frame));
            } else if d == k || d == k + 1 {
                rep.see(touching <= 1, || format!("{x} meets {touching} replacements in {:?}", h.frame));
            }
        }
        let low: Vec<usize> = h.frame.iter().copied().filter(|&x| g.degree(x) + 1 == k).collect();
        for (i, &a) in low.iter().enumerate() {
            for &b in &low[i + 1..] {
                same.see(g.closed_neighbors(a) == g.closed_neighbors(b), || format!("{a}, {b} in {:?}", h.frame));
            }
        }
    }
    if gadgets.incomplete {
        rep.note = Some("gadget search was capped".into());
        same.note = rep.note.clone();
    }
    (rep, same)
}

/// A cluster of size 2 has at most one neighbour of degree at most `k`, and
/// if it has one, lies in a proto-gadget.
pub fn check_cluster_neighbour(finder: &GadgetFinder) -> LemmaCheck {
    let (g, k) = (finder.graph(), finder.k());
    let mut c = LemmaCheck::new("pair-cluster-low-neighbour", "1-tight, ungemmed");
    for cl in find_clusters(g, k).into_iter().filter(|cl| cl.len() == 2) {
        let s = cl.set();
        let x = cl.vertices[0];
        let small: Vec<usize> = g.neighbors(x).difference(&s).iter().filter(|&w| g.degree(w) <= k).collect();
        c.see(small.len() <= 1, || format!("cluster {:?} has low neighbours {small:?}", cl.vertices));
        if small.len() == 1 {
            let res = finder.search(k - 1, &s, &VertexSet::new(), 1);
            if res.gadgets.is_empty() {
                if res.incomplete {
                    c.unsure(format!("no proto-gadget found around {:?} within caps; ", cl.vertices));
                } else {
                    c.see(false, || format!("cluster {:?} is in no proto-gadget", cl.vertices));
                }
            } else {
                c.instances += 1;
            }
        }
    }
    c
}

/// `D_{k-1}(G)`: no `K_4`, no 4-cycle, maximum degree 2, components of at
/// most three vertices, and a component with a triangle is a triangle.
pub fn check_low_degree_shape(g: &Graph, k: usize) -> Vec<LemmaCheck> {
    let (d, lab) = degree_subgraph(g, k - 1);
    let h = "2-tight, ungemmed";
    let mut k4 = LemmaCheck::new("low-degree-no-k4", h);
    for s in crate::cliques::cliques_of_size(&d, 4) {
        k4.see(false, || format!("K4 on {:?}", s.iter().map(|v| lab[v]).collect::<Vec<_>>()));
    }
    k4.instances = k4.instances.max(1);
    let mut c4 = LemmaCheck::new("low-degree-no-c4", h);
    for a in 0..d.n() {
        for cc in a + 1..d.n() {
            let common = d.neighbors(a).intersection(d.neighbors(cc));
            c4.see(common.len() < 2, || format!("4-cycle through {} and {}", lab[a], lab[cc]));
        }
    }
    let mut deg = LemmaCheck::new("low-degree-max-degree-2", h);
    for v in 0..d.n() {
        deg.see(d.degree(v) <= 2, || format!("{} has degree {} in D", lab[v], d.degree(v)));
    }
    let mut size = LemmaCheck::new("low-degree-component-size", h);
    let mut tri = LemmaCheck::new("low-degree-lone-triangle", h);
    for comp in d.components() {
        size.see(comp.len() <= 3, || format!("component of size {}", comp.len()));
        let has_tri = !crate::cliques::cliques_of_size(&d.induced_subgraph(&comp).0, 3).is_empty();
        if has_tri {
            tri.see(comp.len() == 3, || format!("triangle inside a component of size {}", comp.len()));
        }
    }
    vec![k4, c4, deg, size, tri]
}

/// For an induced path `a-b-c` of degree-`(k-1)` vertices, cloning `b` with
/// `a` and with `c` gives 1-tight ungemmed graphs.
pub fn check_path_clones(g: &Graph, params: &PotentialParams) -> Result<LemmaCheck, StructureError> {
    let k = params.k;
    let mut c = LemmaCheck::new("path-clones-stay-tight", "2-tight, ungemmed");
    let low = |v: usize| g.degree(v) + 1 == k;
    for b in (0..g.n()).filter(|&v| low(v)) {
        let nb: Vec<usize> = g.neighbors(b).iter().filter(|&w| low(w)).collect();
        for (i, &a) in nb.iter().enumerate() {
            for &cc in &nb[i + 1..] {
                if g.has_edge(a, cc) {
                    continue;
                }
                for end in [a, cc] {
                    let h = clone_vertex(g, b, end, k)?;
                    let ok = is_tight_ungemmed(&h, params, 1)?;
                    c.see(ok, || format!("cloning {b} with {end} (path {a}-{b}-{cc})"));
                }
            }
        }
    }
    Ok(c)
}

/// If a proto-gadget has `x` (degree `k-1`) in its frame and `y` (degree at
/// most `k+1`) adjacent to `x` outside it, no proto-gadget has both in its
/// frame.
pub fn check_no_common_frame(finder: &GadgetFinder, gadgets: &GadgetSearch) -> LemmaCheck {
    let (g, k) = (finder.graph(), finder.k());
    let mut c = LemmaCheck::new("no-common-frame", "2-tight, ungemmed");
    let mut done = std::collections::HashSet::new();
    for h in &gadgets.gadgets {
        let f = h.frame_set();
        for &x in h.frame.iter().filter(|&&x| g.degree(x) + 1 == k) {
            for y in g.neighbors(x).difference(&f).iter().filter(|&y| g.degree(y) <= k + 1) {
                if !done.insert((x, y)) {
                    continue;
                }
                let mut must = VertexSet::new();
                must.insert(x);
                must.insert(y);
                let res = finder.search(k - 1, &must, &VertexSet::new(), 1);
                c.see(res.gadgets.is_empty(), || format!("{x} and {y} share the frame {:?}", res.gadgets[0].frame));
            }
        }
    }
    if finder.incomplete() {
        c.note = Some("certificate search was capped".into());
    }
    c
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub schema_version: u32,
    pub k: usize,
    pub hypotheses: Vec<HypothesisCheck>,
    pub checks: Vec<LemmaCheck>,
    /// `(x, y)` with `x` dangling from `y`; only computed for `k = 6` with
    /// 2-tightness certified.
    pub dangling: Vec<[usize; 2]>,
}

impl LemmaReport {
    pub fn failures(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.checks.iter().filter(|c| c.status == LemmaStatus::Fail)
    }
}

/// Certify each claimed hypothesis, then check every conclusion whose
/// hypothesis is certified. The rest are reported as skipped.
pub fn check_structural_lemmas(
    g: &Graph,
    params: &PotentialParams,
    claimed: &[Hypothesis],
    caps: SearchCaps,
) -> Result<LemmaReport, StructureError> {
    params.validate()?;
    let k = params.k;
    let critical = is_critical(g, k);
    let mut hypotheses = Vec::new();
    let mut no_add: Option<usize> = None;
    let mut tight: Option<u32> = None;
    for &h in claimed {
        let (ok, note) = match h {
            Hypothesis::NoEdgeAdditions { i } => {
                if !critical || i == 0 {
                    (false, Some("graph is not critical or i = 0".to_string()))
                } else {
                    match find_i_edge_addition(g, i, k, ExtensionCaps::default()) {
                        Ok(EdgeAdditionOutcome::NotFound) => (true, None),
                        Ok(EdgeAdditionOutcome::Found(w)) => (false, Some(format!("edge-addition {:?}", w.added))),
                        Ok(EdgeAdditionOutcome::BudgetExhausted { .. }) => {
                            (false, Some("search budget exhausted".into()))
                        }
                        Err(e) => (false, Some(e.to_string())),
                    }
                }
            }
            Hypothesis::TightUngemmed { i } => (is_tight_ungemmed(g, params, i)?, None),
        };
        if ok {
            match h {
                Hypothesis::NoEdgeAdditions { i } => no_add = no_add.max(Some(i)),
                Hypothesis::TightUngemmed { i } => tight = tight.max(Some(i)),
            }
        }
        hypotheses.push(HypothesisCheck { hypothesis: h, certified: ok, note });
    }

    let mut checks = Vec::new();
    match no_add {
        Some(i) => checks.push(check_common_neighbours(g, k, i)),
        None => checks.push(LemmaCheck::skipped("common-neighbours", "no i-edge-addition")),
    }
    let at = |lvl: u32| tight.is_some_and(|t| t >= lvl);
    if at(0) {
        checks.push(check_cluster_size(g, k));
        checks.push(check_no_low_degree_p4(g, k));
    } else {
        checks.push(LemmaCheck::skipped("cluster-size", "tight, ungemmed"));
        checks.push(LemmaCheck::skipped("no-low-degree-induced-p4", "tight, ungemmed"));
    }
    let mut dangling = Vec::new();
    let six = [
        "split-subgraph-degrees",
        "replacement-degree",
        "low-degree-frame-vertices-share-cluster",
        "pair-cluster-low-neighbour",
        "low-degree-no-k4",
        "low-degree-no-c4",
        "low-degree-max-degree-2",
        "low-degree-component-size",
        "low-degree-lone-triangle",
        "path-clones-stay-tight",
        "no-common-frame",
    ];
    if k == 6 && at(1) {
        let finder = GadgetFinder::new(g, k, caps);
        checks.push(check_cluster_neighbour(&finder));
        if at(2) {
            let gadgets = finder.all(k - 1);
            checks.push(check_split_degrees(&finder));
            let (a, b) = check_proto_gadget_frames(g, k, &gadgets);
            checks.push(a);
            checks.push(b);
            checks.extend(check_low_degree_shape(g, k));
            checks.push(check_path_clones(g, params)?);
            checks.push(check_no_common_frame(&finder, &gadgets));
            for (x, y) in g.edges() {
                for (a, b) in [(x, y), (y, x)] {
                    if let Dangling::Dangles { .. } = dangles_from(g, a, b, params, &finder)? {
                        dangling.push([a, b]);
                    }
                }
            }
            dangling.sort_unstable();
        } else {
            for name in six.iter().filter(|&&n| n != "pair-cluster-low-neighbour") {
                checks.push(LemmaCheck::skipped(name, "2-tight, ungemmed"));
            }
        }
    } else {
        for name in six {
            let mut c = LemmaCheck::skipped(
                name,
                if name == "pair-cluster-low-neighbour" { "1-tight, ungemmed" } else { "2-tight, ungemmed" },
            );
            if k != 6 {
                c.note = Some("only stated for k = 6".into());
            }
            checks.push(c);
        }
    }
    Ok(LemmaReport { schema_version: SCHEMA_VERSION, k, hypotheses, checks, dangling })
}

// ---------------------------------------------------------------- census

/// Gems, clusters, proto-gadgets, kites and `D_{k-1}` shapes of one graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub schema_version: u32,
    pub k: usize,
    pub graph6: String,
    pub gems: Vec<Gem>,
    pub clusters: Vec<Cluster>,
    pub proto_gadgets: GadgetSearch,
    pub kites: GadgetSearch,
    pub low_degree_components: Vec<D5Component>,
    /// The frame from the recognised trace, when `g` is `k`-Ore.
    pub frame: Option<crate::ore::Frame>,
    #[serde(with = "rational::serde_str")]
    pub potential: crate::Rational,
}

pub fn structure_report(
    g: &Graph,
    params: &PotentialParams,
    caps: SearchCaps,
) -> Result<StructureReport, StructureError> {
    let k = params.k;
    let finder = GadgetFinder::new(g, k, caps);
    let frame = match recognize_k_ore(g, k, caps.recognition_budget) {
        Ok(Recognition::KOre { trace }) => crate::ore::find_frame(g, &trace).ok(),
        _ => None,
    };
    Ok(StructureReport {
        schema_version: SCHEMA_VERSION,
        k,
        graph6: g.to_graph6(),
        gems: find_gems(g, k),
        clusters: find_clusters(g, k),
        proto_gadgets: finder.all(k - 1),
        kites: finder.all(k - 2),
        low_degree_components: classify_low_degree_components(g, k),
        frame,
        potential: potential(g, params)?,
    })
}
