//! Critical extensions of a coloured subset, collapsibility, and
//! edge-addition search.

use crate::coloring::{extract_critical_subgraph, for_each_coloring_up_to_renaming, is_colorable, is_proper_coloring};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::ore::is_k_ore;
use crate::potential::{clique_weight, potential, subset_potential, Claim, PotentialError, PotentialParams};
use crate::rational::int;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("extension record is inconsistent: {0}")]
    Invariant(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

fn pre(msg: impl Into<String>) -> ExtensionError {
    ExtensionError::Precondition(msg.into())
}

/// Search limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionCaps {
    /// Non-edge sets tried by [`find_i_edge_addition`].
    pub max_sets: usize,
    /// Colourings enumerated per collapsibility decision.
    pub max_colorings: usize,
}

impl Default for ExtensionCaps {
    fn default() -> Self {
        ExtensionCaps { max_sets: 20_000, max_colorings: 50_000 }
    }
}

impl ExtensionCaps {
    pub fn scaled(self, factor: u64) -> Self {
        ExtensionCaps {
            max_sets: self.max_sets.saturating_mul(factor as usize),
            max_colorings: self.max_colorings.saturating_mul(factor as usize),
        }
    }
}

/// A vertex of the extender: an uncoloured host vertex or the merged colour
/// class `x_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExtenderVertex {
    Host { vertex: usize },
    Core { color: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionRecord {
    pub k: usize,
    /// `R`, increasing.
    pub base: Vec<usize>,
    /// Colour of each vertex of `base`, in `1..k`.
    pub coloring: Vec<usize>,
    /// The `k`-critical extender `W`; vertex `i` is `extender_vertices[i]`.
    pub extender: Graph,
    pub extender_vertices: Vec<ExtenderVertex>,
    /// Colours whose class vertex lies in `W`.
    pub core: Vec<usize>,
    /// `R' = R + (V(W) - X)`, increasing.
    pub extended: Vec<usize>,
    /// `|E(G[R'])| - (|E(G[R])| + |E(W)| - |E(K_X)|)`.
    pub incompleteness: i64,
    pub spanning: bool,
}

impl ExtensionRecord {
    pub fn is_complete(&self) -> bool {
        self.incompleteness == 0
    }

    /// Recheck everything derivable from `g`.
    pub fn validate(&self, g: &Graph) -> Result<(), ExtensionError> {
        let bad = |m: String| Err(ExtensionError::Invariant(m));
        let r = VertexSet::from_slice(&self.base);
        let r2 = VertexSet::from_slice(&self.extended);
        if !r.is_subset(&r2) || r == r2 {
            return bad("R is not a proper subset of R'".into());
        }
        g.check_set(&r2)?;
        if !crate::coloring::is_critical(&self.extender, self.k) {
            return bad("extender is not k-critical".into());
        }
        if self.core.is_empty() {
            return bad("empty core".into());
        }
        if self.extender_vertices.len() != self.extender.n() {
            return bad("extender labels do not match".into());
        }
        let x = self.core.len();
        let expect = g.edges_within(&r2) as i64
            - (g.edges_within(&r) as i64 + self.extender.edge_count() as i64 - (x * (x - 1) / 2) as i64);
        if expect != self.incompleteness {
            return bad(format!("incompleteness is {expect}, recorded {}", self.incompleteness));
        }
        if self.incompleteness < 0 {
            return bad(format!("negative incompleteness {}", self.incompleteness));
        }
        if self.spanning != (r2.len() == g.n()) {
            return bad("spanning flag".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ExtensionOutcome {
    Extension(ExtensionRecord),
    /// `G_{R,phi}` is `(k-1)`-colourable, which cannot happen when `g` is
    /// `k`-critical.
    NoExtension,
}

/// `G_{R,phi}` with labels: `V - R` in increasing order, then `x_1..x_{k-1}`.
pub fn merge_color_classes(
    g: &Graph,
    r: &VertexSet,
    coloring: &[usize],
    k: usize,
) -> Result<(Graph, Vec<ExtenderVertex>), ExtensionError> {
    let rest: Vec<usize> = g.vertices().difference(r).to_vec();
    let m = rest.len();
    let mut labels: Vec<ExtenderVertex> = rest.iter().map(|&v| ExtenderVertex::Host { vertex: v }).collect();
    labels.extend((1..k).map(|c| ExtenderVertex::Core { color: c }));
    let mut h = Graph::try_new(m + k - 1)?;
    let pos = |v: usize| rest.binary_search(&v).ok();
    for (i, &v) in rest.iter().enumerate() {
        for w in g.neighbors(v).iter() {
            match pos(w) {
                Some(j) if j > i => h.add_edge(i, j),
                _ => {}
            }
        }
    }
    for (&v, &c) in r.to_vec().iter().zip(coloring) {
        for w in g.neighbors(v).iter() {
            if let Some(j) = pos(w) {
                h.add_edge(m + c - 1, j);
            }
        }
    }
    for a in 0..k - 1 {
        for b in a + 1..k - 1 {
            h.add_edge(m + a, m + b);
        }
    }
    Ok((h, labels))
}

/// Build the critical extension of `r` under `coloring` (one colour in
/// `1..k` per vertex of `r`, increasing order).
pub fn build_extension(
    g: &Graph,
    r: &VertexSet,
    coloring: &[usize],
    k: usize,
) -> Result<ExtensionOutcome, ExtensionError> {
    g.check_set(r)?;
    if k < 3 {
        return Err(pre("k must be at least 3"));
    }
    if r.len() == g.n() {
        return Err(pre("R must be a proper subset"));
    }
    if coloring.len() != r.len() {
        return Err(pre(format!("{} colours for {} vertices", coloring.len(), r.len())));
    }
    let (gr, _) = g.induced_subgraph(r);
    if !is_proper_coloring(&gr, coloring, k - 1) {
        return Err(pre("colouring is not a proper (k-1)-colouring of G[R]"));
    }
    let (h, labels) = merge_color_classes(g, r, coloring, k)?;
    let w = match extract_critical_subgraph(&h, k) {
        Ok(w) => w,
        Err(_) => return Ok(ExtensionOutcome::NoExtension),
    };
    let wl: Vec<ExtenderVertex> = w.vertices.iter().map(|&i| labels[i]).collect();
    let mut core = Vec::new();
    let mut r2 = *r;
    for l in &wl {
        match *l {
            ExtenderVertex::Host { vertex } => r2.insert(vertex),
            ExtenderVertex::Core { color } => core.push(color),
        }
    }
    let x = core.len();
    let incompleteness = g.edges_within(&r2) as i64
        - (g.edges_within(r) as i64 + w.graph.edge_count() as i64 - (x * (x - 1) / 2) as i64);
    let rec = ExtensionRecord {
        k,
        base: r.to_vec(),
        coloring: coloring.to_vec(),
        extender: w.graph,
        extender_vertices: wl,
        core,
        extended: r2.to_vec(),
        incompleteness,
        spanning: r2.len() == g.n(),
    };
    rec.validate(g)?;
    Ok(ExtensionOutcome::Extension(rec))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Collapsibility {
    Collapsible,
    /// A colouring in which every colour leaves more than `i` edges from `R`
    /// to the outside; colours of `R` in increasing order.
    NotCollapsible {
        coloring: Vec<usize>,
    },
    BudgetExhausted {
        colorings: usize,
    },
}

/// `min_c |E(phi^{-1}(C - c), V - R)|` for one colouring.
pub fn escaping_edges(g: &Graph, r: &VertexSet, coloring: &[usize], k: usize) -> usize {
    let out = g.vertices().difference(r);
    let mut per = vec![0usize; k];
    let mut total = 0;
    for (&v, &c) in r.to_vec().iter().zip(coloring) {
        let e = g.neighbors(v).intersection(&out).len();
        per[c] += e;
        total += e;
    }
    (1..k).map(|c| total - per[c]).min().unwrap_or(0)
}

/// Is `r` `i`-collapsible? Every proper `(k-1)`-colouring of `G[R]` must
/// leave at most `i` edges to the outside from vertices off some colour.
/// Colourings are enumerated up to renaming, which the minimum over colours
/// does not see.
pub fn is_i_collapsible(
    g: &Graph,
    r: &VertexSet,
    i: usize,
    k: usize,
    caps: ExtensionCaps,
) -> Result<Collapsibility, ExtensionError> {
    g.check_set(r)?;
    if r.len() < 2 || r.len() == g.n() {
        return Err(pre("R needs at least 2 vertices and must be a proper subset"));
    }
    if k < 3 {
        return Err(pre("k must be at least 3"));
    }
    let (gr, _) = g.induced_subgraph(r);
    let mut seen = 0usize;
    let mut witness = None;
    let mut exhausted = false;
    for_each_coloring_up_to_renaming(&gr, k - 1, &mut |col| {
        seen += 1;
        if seen > caps.max_colorings {
            exhausted = true;
            return false;
        }
        if escaping_edges(g, r, col, k) > i {
            witness = Some(col.to_vec());
            return false;
        }
        true
    });
    Ok(match (witness, exhausted) {
        (Some(coloring), _) => Collapsibility::NotCollapsible { coloring },
        (None, true) => Collapsibility::BudgetExhausted { colorings: caps.max_colorings },
        (None, false) => Collapsibility::Collapsible,
    })
}

/// One extension per colouring of `G[R]` up to renaming. `None` if the
/// colouring cap was hit.
pub fn all_extensions(
    g: &Graph,
    r: &VertexSet,
    k: usize,
    caps: ExtensionCaps,
) -> Result<Option<Vec<ExtensionOutcome>>, ExtensionError> {
    g.check_set(r)?;
    let (gr, _) = g.induced_subgraph(r);
    let mut cols = Vec::new();
    let done = for_each_coloring_up_to_renaming(&gr, k - 1, &mut |c| {
        cols.push(c.to_vec());
        cols.len() <= caps.max_colorings
    });
    if !done {
        return Ok(None);
    }
    cols.iter().map(|c| build_extension(g, r, c, k)).collect::<Result<Vec<_>, _>>().map(Some)
}

/// A set of at most `i` non-edges whose addition creates a `k`-critical
/// subgraph on a proper vertex subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAddition {
    pub added: Vec<[usize; 2]>,
    /// `V(H)`, increasing.
    pub vertices: Vec<usize>,
    /// `E(H)` in host labels.
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EdgeAdditionOutcome {
    Found(EdgeAddition),
    NotFound,
    BudgetExhausted { sets: usize },
}

/// First `i`-edge-addition, trying sets by size and then in colex order of
/// the non-edge list.
pub fn find_i_edge_addition(
    g: &Graph,
    i: usize,
    k: usize,
    caps: ExtensionCaps,
) -> Result<EdgeAdditionOutcome, ExtensionError> {
    find_i_edge_addition_among(g, i, k, &g.non_edges_colex(), caps)
}

/// [`find_i_edge_addition`] restricted to the given non-edges.
pub fn find_i_edge_addition_among(
    g: &Graph,
    i: usize,
    k: usize,
    pool: &[(usize, usize)],
    caps: ExtensionCaps,
) -> Result<EdgeAdditionOutcome, ExtensionError> {
    if i == 0 {
        return Err(pre("i must be at least 1"));
    }
    if k < 2 {
        return Err(pre("k must be at least 2"));
    }
    for &(u, v) in pool {
        if u == v || u >= g.n() || v >= g.n() || g.has_edge(u, v) {
            return Err(pre(format!("({u}, {v}) is not a non-edge")));
        }
    }
    let n = g.n();
    // A critical subgraph on a proper subset avoids some vertex v, so it
    // suffices to test (G + S) - v for every v.
    let base_ok: Vec<bool> =
        (0..n).map(|v| is_colorable(&g.remove_vertices(&VertexSet::from_slice(&[v])).0, k - 1).is_some()).collect();
    if let Some(v) = base_ok.iter().position(|ok| !ok) {
        return Ok(EdgeAdditionOutcome::Found(witness(g, &[], v, k)));
    }
    let mut tried = 0usize;
    for size in 1..=i.min(pool.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            tried += 1;
            if tried > caps.max_sets {
                return Ok(EdgeAdditionOutcome::BudgetExhausted { sets: caps.max_sets });
            }
            let s: Vec<(usize, usize)> = idx.iter().map(|&j| pool[j]).collect();
            let h = g.with_edges(&s)?;
            for v in 0..n {
                if s.iter().all(|&(a, b)| a == v || b == v) {
                    continue;
                }
                let (hv, _) = h.remove_vertices(&VertexSet::from_slice(&[v]));
                if is_colorable(&hv, k - 1).is_none() {
                    return Ok(EdgeAdditionOutcome::Found(witness(g, &s, v, k)));
                }
            }
            // next combination in colex order
            let mut j = 0;
            while j < size && (j + 1 < size && idx[j] + 1 == idx[j + 1] || j + 1 == size && idx[j] + 1 == pool.len()) {
                j += 1;
            }
            if j == size {
                break;
            }
            idx[j] += 1;
            for (t, slot) in idx.iter_mut().enumerate().take(j) {
                *slot = t;
            }
        }
    }
    Ok(EdgeAdditionOutcome::NotFound)
}

fn witness(g: &Graph, s: &[(usize, usize)], v: usize, k: usize) -> EdgeAddition {
    let h = g.with_edges(s).expect("validated non-edges");
    let (hv, lab) = h.remove_vertices(&VertexSet::from_slice(&[v]));
    let sub = extract_critical_subgraph(&hv, k).expect("not (k-1)-colourable");
    let vertices: Vec<usize> = sub.vertices.iter().map(|&i| lab[i]).collect();
    let edges = sub.host_edges().into_iter().map(|(a, b)| [lab[a], lab[b]]).collect();
    EdgeAddition { added: s.iter().map(|&(a, b)| [a.min(b), a.max(b)]).collect(), vertices, edges }
}

/// The potential inequalities attached to a critical extension: the
/// submodularity bound, and the edge-drop bound when `G[R]` is not a clique.
pub fn check_potential_inequalities(
    g: &Graph,
    rec: &ExtensionRecord,
    params: &PotentialParams,
) -> Result<Vec<Claim>, ExtensionError> {
    rec.validate(g)?;
    let k = params.k;
    if rec.k != k {
        return Err(pre("record and parameters disagree on k"));
    }
    let r = VertexSet::from_slice(&rec.base);
    let r2 = VertexSet::from_slice(&rec.extended);
    let pr = subset_potential(g, &r, params)?;
    let pr2 = subset_potential(g, &r2, params)?;
    let pw = potential(&rec.extender, params)?;
    let x = rec.core.len();
    let kx = Graph::complete(x);
    let pkx = potential(&kx, params)?;
    let tkx = clique_weight(&kx, k)?.value;
    let i = int(rec.incompleteness);
    let kk = int(k as i64);
    let rhs = &pr + &pw
        - int(2) * &i * (&kk - int(1))
        - (pkx + &params.delta * int(tkx as i64) - &params.delta * int(x as i64));
    let mut out = vec![Claim::cmp("extension-submodular", pr2.clone(), "<=", rhs, true)];
    let clique = g.is_clique(&r);
    let rhs2 = &pr - int(2) * (&i + int(1)) * (&kk - int(1)) - &params.delta;
    let mut c = Claim::cmp("extension-edge-drop", pr2, "<=", rhs2, !clique);
    if clique {
        c = c.note("G[R] is a clique");
    }
    out.push(c);
    Ok(out)
}

/// Upper bound on the potential of the vertex set of an edge-addition
/// witness, assuming `g` is tight. The sharper form applies when the
/// witness is not `k`-Ore.
pub fn check_edge_addition_potential(
    g: &Graph,
    w: &EdgeAddition,
    params: &PotentialParams,
) -> Result<Vec<Claim>, ExtensionError> {
    let k = params.k;
    let r = VertexSet::from_slice(&w.vertices);
    let pr = subset_potential(g, &r, params)?;
    let pg = potential(g, params)?;
    let tight = crate::coloring::is_critical(g, k) && pg > params.tight_threshold(0);
    let i = int(w.added.len() as i64);
    let kk = int(k as i64);
    let slack = int(2) * &i * (&kk - int(1)) + &i * &params.delta;
    let mut a = Claim::cmp("edge-addition-potential", pr.clone(), "<=", &pg + &params.p + &params.q + &slack, tight);
    if !tight {
        a = a.note("graph is not tight");
    }
    let h = Graph::from_edges(
        w.vertices.len(),
        &w.edges
            .iter()
            .map(|e| (w.vertices.binary_search(&e[0]).unwrap(), w.vertices.binary_search(&e[1]).unwrap()))
            .collect::<Vec<_>>(),
    )?;
    let non_ore = matches!(is_k_ore(&h, k), Ok(false));
    let b = Claim::cmp("edge-addition-potential-non-ore", pr, "<=", pg + &params.q + slack, tight && non_ore);
    Ok(vec![a, b])
}
