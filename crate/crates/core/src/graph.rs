//! Simple undirected graphs on `0..n` with bitset adjacency.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest vertex count a [`Graph`] can hold.
pub const MAX_VERTICES: usize = 512;
const WORDS: usize = MAX_VERTICES / 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {v} out of range for graph on {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("graph on {0} vertices exceeds the supported maximum of {MAX_VERTICES}")]
    TooLarge(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex sets overlap at vertex {0}")]
    Overlap(usize),
    #[error("vertices {0} and {1} are adjacent; identifying them would create a loop")]
    AdjacentIdentification(usize, usize),
    #[error("malformed graph6 at byte {offset}: {reason}")]
    Graph6 { offset: usize, reason: String },
    #[error("bad adjacency JSON: {0}")]
    Json(String),
}

/// Fixed-capacity bitset over vertex labels.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VertexSet([u64; WORDS]);

impl VertexSet {
    pub const fn new() -> Self {
        VertexSet([0; WORDS])
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut s = Self::new();
        for w in 0..WORDS {
            let lo = w * 64;
            if n >= lo + 64 {
                s.0[w] = u64::MAX;
            } else if n > lo {
                s.0[w] = (1u64 << (n - lo)) - 1;
            }
        }
        s
    }

    pub fn from_slice(vs: &[usize]) -> Self {
        vs.iter().copied().collect()
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.0[v >> 6] |= 1 << (v & 63);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        self.0[v >> 6] &= !(1 << (v & 63));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < MAX_VERTICES && self.0[v >> 6] >> (v & 63) & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn union(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..WORDS {
            r.0[i] |= o.0[i];
        }
        r
    }

    #[inline]
    pub fn intersection(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..WORDS {
            r.0[i] &= o.0[i];
        }
        r
    }

    #[inline]
    pub fn difference(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..WORDS {
            r.0[i] &= !o.0[i];
        }
        r
    }

    pub fn is_subset(&self, o: &Self) -> bool {
        (0..WORDS).all(|i| self.0[i] & !o.0[i] == 0)
    }

    pub fn is_disjoint(&self, o: &Self) -> bool {
        (0..WORDS).all(|i| self.0[i] & o.0[i] == 0)
    }

    /// Smallest element, if any.
    pub fn first(&self) -> Option<usize> {
        for (i, &w) in self.0.iter().enumerate() {
            if w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(&self) -> VertexSetIter {
        VertexSetIter { words: self.0, idx: 0 }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut s = VertexSet::new();
        for v in it {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct VertexSetIter {
    words: [u64; WORDS],
    idx: usize,
}

impl Iterator for VertexSetIter {
    type Item = usize;
    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.idx < WORDS {
            let w = self.words[self.idx];
            if w != 0 {
                self.words[self.idx] = w & (w - 1);
                return Some(self.idx * 64 + w.trailing_zeros() as usize);
            }
            self.idx += 1;
        }
        None
    }
}

impl IntoIterator for &VertexSet {
    type Item = usize;
    type IntoIter = VertexSetIter;
    fn into_iter(self) -> VertexSetIter {
        self.iter()
    }
}

/// What to do when identifying two adjacent vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoopPolicy {
    /// Refuse with [`GraphError::AdjacentIdentification`].
    #[default]
    Reject,
    /// Drop the would-be loop silently.
    Drop,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<VertexSet>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

impl Graph {
    /// Edgeless graph on `n` vertices. Panics if `n > MAX_VERTICES`.
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_VERTICES, "graph too large: {n}");
        Graph { n, adj: vec![VertexSet::new(); n] }
    }

    pub fn try_new(n: usize) -> Result<Self, GraphError> {
        if n > MAX_VERTICES {
            return Err(GraphError::TooLarge(n));
        }
        Ok(Self::new(n))
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::try_new(n)?;
        for &(u, v) in edges {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            g.adj[u] = VertexSet::full(n);
            g.adj[u].remove(u);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 1..n {
            g.add_edge(i - 1, i);
        }
        g
    }

    /// Join: `self` on the low labels, `other` shifted up, all cross edges present.
    pub fn join(&self, other: &Graph) -> Graph {
        let mut g = self.disjoint_union(other);
        for u in 0..self.n {
            for v in 0..other.n {
                g.add_edge(u, self.n + v);
            }
        }
        g
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut g = Graph::new(self.n + other.n);
        for (u, v) in self.edges() {
            g.add_edge(u, v);
        }
        for (u, v) in other.edges() {
            g.add_edge(self.n + u, self.n + v);
        }
        g
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.n {
            Err(GraphError::VertexOutOfRange { v, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn check_set(&self, s: &VertexSet) -> Result<(), GraphError> {
        match s.iter().find(|&v| v >= self.n) {
            Some(v) => Err(GraphError::VertexOutOfRange { v, n: self.n }),
            None => Ok(()),
        }
    }

    /// Panics on out-of-range endpoints or loops.
    #[inline]
    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.try_add_edge(u, v).expect("invalid edge")
    }

    pub fn try_add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        if u < self.n && v < self.n {
            self.adj[u].remove(v);
            self.adj[v].remove(u);
        }
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    /// `N[v]`.
    pub fn closed_neighbors(&self, v: usize) -> VertexSet {
        let mut s = self.adj[v];
        s.insert(v);
        s
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degree_in(&self, v: usize, s: &VertexSet) -> usize {
        self.adj[v].intersection(s).len()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in self.adj[u].iter() {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Non-edges `(u, v)` with `u < v` in colex order (by `v`, then `u`).
    pub fn non_edges_colex(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 0..self.n {
            for u in 0..v {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Number of edges with both ends in `s`.
    pub fn edges_within(&self, s: &VertexSet) -> usize {
        s.iter().map(|v| self.adj[v].intersection(s).len()).sum::<usize>() / 2
    }

    pub fn is_clique(&self, s: &VertexSet) -> bool {
        let k = s.len();
        s.iter().all(|v| self.adj[v].intersection(s).len() == k - 1)
    }

    pub fn is_independent(&self, s: &VertexSet) -> bool {
        s.iter().all(|v| self.adj[v].is_disjoint(s))
    }

    /// Induced subgraph on `s`. Vertex `i` of the result is `labels[i]` in `self`;
    /// labels are increasing.
    pub fn induced_subgraph(&self, s: &VertexSet) -> (Graph, Vec<usize>) {
        let labels = s.iter().filter(|&v| v < self.n).collect::<Vec<_>>();
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in labels.iter().enumerate() {
            pos[v] = i;
        }
        let mut g = Graph::new(labels.len());
        for (i, &v) in labels.iter().enumerate() {
            for w in self.adj[v].intersection(s).iter() {
                g.adj[i].insert(pos[w]);
            }
        }
        (g, labels)
    }

    /// Graph with the vertices of `s` deleted, plus the label map.
    pub fn remove_vertices(&self, s: &VertexSet) -> (Graph, Vec<usize>) {
        self.induced_subgraph(&self.vertices().difference(s))
    }

    /// Vertices of `a` having a neighbour outside `a`.
    pub fn boundary(&self, a: &VertexSet) -> VertexSet {
        a.iter().filter(|&v| !self.adj[v].difference(a).is_empty()).collect()
    }

    /// Number of edges between disjoint sets `a` and `b`.
    pub fn edges_between(&self, a: &VertexSet, b: &VertexSet) -> Result<usize, GraphError> {
        if let Some(v) = a.intersection(b).first() {
            return Err(GraphError::Overlap(v));
        }
        Ok(a.iter().map(|v| self.adj[v].intersection(b).len()).sum())
    }

    /// Merge `u` and `v`. The merged vertex takes label `min(u, v)`; labels above
    /// `max(u, v)` shift down by one. Parallel edges collapse.
    pub fn identify_vertices(&self, u: usize, v: usize, policy: LoopPolicy) -> Result<Graph, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(self.clone());
        }
        if self.has_edge(u, v) && policy == LoopPolicy::Reject {
            return Err(GraphError::AdjacentIdentification(u, v));
        }
        let (keep, gone) = (u.min(v), u.max(v));
        let relabel = |w: usize| {
            if w == gone {
                keep
            } else if w > gone {
                w - 1
            } else {
                w
            }
        };
        let mut g = Graph::new(self.n - 1);
        for (a, b) in self.edges() {
            let (a, b) = (relabel(a), relabel(b));
            if a != b {
                g.add_edge(a, b);
            }
        }
        Ok(g)
    }

    /// Graph with all pairs in `extra` added as edges.
    pub fn with_edges(&self, extra: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut g = self.clone();
        for &(u, v) in extra {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn without_edge(&self, u: usize, v: usize) -> Graph {
        let mut g = self.clone();
        g.remove_edge(u, v);
        g
    }

    /// `perm[v]` is the new label of `v`.
    pub fn permute(&self, perm: &[usize]) -> Graph {
        let mut g = Graph::new(self.n);
        for (u, v) in self.edges() {
            g.add_edge(perm[u], perm[v]);
        }
        g
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::new(self.n);
        let full = VertexSet::full(self.n);
        for v in 0..self.n {
            let mut s = full.difference(&self.adj[v]);
            s.remove(v);
            g.adj[v] = s;
        }
        g
    }

    /// Connected components of `G[s]`, each sorted, ordered by least vertex.
    pub fn components_within(&self, s: &VertexSet) -> Vec<VertexSet> {
        let mut left = *s;
        let mut out = Vec::new();
        while let Some(start) = left.first() {
            let mut comp = VertexSet::new();
            comp.insert(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VertexSet::new();
                for v in frontier.iter() {
                    next = next.union(&self.adj[v]);
                }
                next = next.intersection(s).difference(&comp);
                comp = comp.union(&next);
                frontier = next;
            }
            left = left.difference(&comp);
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<VertexSet> {
        self.components_within(&self.vertices())
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Encode in graph6 (no header, no newline).
    pub fn to_graph6(&self) -> String {
        let mut out = Vec::new();
        let n = self.n;
        if n <= 62 {
            out.push(n as u8 + 63);
        } else if n <= 258_047 {
            out.push(126);
            for shift in [12, 6, 0] {
                out.push(((n >> shift) & 63) as u8 + 63);
            }
        } else {
            out.extend([126, 126]);
            for shift in [30, 24, 18, 12, 6, 0] {
                out.push(((n >> shift) & 63) as u8 + 63);
            }
        }
        let mut acc = 0u8;
        let mut bits = 0;
        for j in 1..n {
            for i in 0..j {
                acc = (acc << 1) | self.has_edge(i, j) as u8;
                bits += 1;
                if bits == 6 {
                    out.push(acc + 63);
                    acc = 0;
                    bits = 0;
                }
            }
        }
        if bits > 0 {
            out.push((acc << (6 - bits)) + 63);
        }
        String::from_utf8(out).expect("graph6 is ascii")
    }

    /// Decode one graph6 string. An optional `>>graph6<<` header and trailing
    /// newline are accepted.
    pub fn from_graph6(s: &str) -> Result<Graph, GraphError> {
        let mut bytes = s.as_bytes();
        let mut base = 0;
        const HEADER: &[u8] = b">>graph6<<";
        if bytes.starts_with(HEADER) {
            bytes = &bytes[HEADER.len()..];
            base = HEADER.len();
        }
        while let [rest @ .., b'\n' | b'\r'] = bytes {
            bytes = rest;
        }
        let err =
            |offset: usize, reason: &str| GraphError::Graph6 { offset: base + offset, reason: reason.to_string() };
        if bytes.is_empty() {
            return Err(err(0, "empty input"));
        }
        if let Some(i) = bytes.iter().position(|&b| !(63..=126).contains(&b)) {
            return Err(err(i, &format!("byte {:#04x} outside 63..=126", bytes[i])));
        }
        let (n, mut pos) = if bytes[0] != 126 {
            ((bytes[0] - 63) as usize, 1)
        } else if bytes.len() > 1 && bytes[1] == 126 {
            if bytes.len() < 8 {
                return Err(err(bytes.len(), "truncated vertex count"));
            }
            let n = bytes[2..8].iter().fold(0usize, |a, &b| (a << 6) | (b - 63) as usize);
            (n, 8)
        } else {
            if bytes.len() < 4 {
                return Err(err(bytes.len(), "truncated vertex count"));
            }
            let n = bytes[1..4].iter().fold(0usize, |a, &b| (a << 6) | (b - 63) as usize);
            (n, 4)
        };
        if n > MAX_VERTICES {
            return Err(err(0, &format!("{n} vertices exceeds maximum {MAX_VERTICES}")));
        }
        let nbits = n * n.saturating_sub(1) / 2;
        let need = nbits.div_ceil(6);
        let have = bytes.len() - pos;
        if have < need {
            return Err(err(bytes.len(), &format!("truncated: expected {need} adjacency bytes, found {have}")));
        }
        if have > need {
            return Err(err(pos + need, "trailing bytes after adjacency data"));
        }
        let mut g = Graph::new(n);
        let mut k = 0;
        'outer: for j in 1..n {
            for i in 0..j {
                let byte = bytes[pos + k / 6] - 63;
                if byte >> (5 - k % 6) & 1 == 1 {
                    g.add_edge(i, j);
                }
                k += 1;
                if k == nbits {
                    break 'outer;
                }
            }
        }
        if nbits % 6 != 0 {
            pos += need - 1;
            let pad = 6 - nbits % 6;
            if (bytes[pos] - 63) & ((1 << pad) - 1) != 0 {
                return Err(err(pos, "nonzero padding bits"));
            }
        }
        Ok(g)
    }

    pub fn to_adjacency_json(&self) -> AdjacencyJson {
        AdjacencyJson { n: self.n, edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }

    pub fn from_adjacency_json(j: &AdjacencyJson) -> Result<Graph, GraphError> {
        let mut g = Graph::try_new(j.n).map_err(|e| GraphError::Json(e.to_string()))?;
        for &[u, v] in &j.edges {
            g.try_add_edge(u, v).map_err(|e| GraphError::Json(e.to_string()))?;
        }
        Ok(g)
    }
}

/// `{"n": int, "edges": [[u, v], ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_adjacency_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = AdjacencyJson::deserialize(d)?;
        Graph::from_adjacency_json(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph6_known_strings() {
        assert_eq!(Graph::complete(6).to_graph6(), "E~~w");
        assert_eq!(Graph::new(1).to_graph6(), "@");
        assert_eq!(Graph::new(5).to_graph6(), "D??");
        assert_eq!(Graph::from_graph6("E~~w").unwrap(), Graph::complete(6));
        assert_eq!(Graph::from_graph6(">>graph6<<E~~w\n").unwrap(), Graph::complete(6));
        assert_eq!(Graph::new(0).to_graph6(), "?");
        assert_eq!(Graph::from_graph6("?").unwrap().n(), 0);
    }

    #[test]
    fn graph6_long_form() {
        let g = Graph::cycle(100);
        let s = g.to_graph6();
        assert_eq!(s.as_bytes()[0], 126);
        assert_eq!(Graph::from_graph6(&s).unwrap(), g);
    }

    #[test]
    fn graph6_errors_name_offsets() {
        match Graph::from_graph6("E~~") {
            Err(GraphError::Graph6 { offset, .. }) => assert_eq!(offset, 3),
            r => panic!("{r:?}"),
        }
        match Graph::from_graph6("E~ w") {
            Err(GraphError::Graph6 { offset, .. }) => assert_eq!(offset, 2),
            r => panic!("{r:?}"),
        }
        assert!(Graph::from_graph6("E~~x").is_err());
        assert!(Graph::from_graph6("E~~w?").is_err());
        assert!(Graph::from_graph6("").is_err());
    }

    #[test]
    fn identify_and_boundary() {
        let g = Graph::cycle(5);
        assert!(g.identify_vertices(0, 1, LoopPolicy::Reject).is_err());
        let h = g.identify_vertices(0, 2, LoopPolicy::Reject).unwrap();
        assert_eq!(h.n(), 4);
        // 0~1 collapses with 2~1 into one edge.
        assert_eq!(h.edge_count(), 4);
        let a = VertexSet::from_slice(&[0, 1]);
        assert_eq!(g.boundary(&a).to_vec(), vec![0, 1]);
        assert_eq!(g.edges_between(&a, &VertexSet::from_slice(&[2, 3, 4])).unwrap(), 2);
        assert!(g.edges_between(&a, &VertexSet::from_slice(&[1, 2])).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::cycle(5).join(&Graph::complete(3));
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with("{\"n\":8,\"edges\":[[0,1]"));
        let h: Graph = serde_json::from_str(&s).unwrap();
        assert_eq!(g, h);
    }
}
