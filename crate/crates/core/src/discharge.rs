//! Six-stage discharging for 6-critical graphs with an exact charge ledger,
//! and the independent-set edge bound used by the global stages.

use crate::coloring::{is_f_choosable, ColoringError, CHOOSABILITY_CAP};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::potential::{clique_weight, potential, PotentialError, PotentialParams, SCHEMA_VERSION};
use crate::rational::{self, frac, int, zero, Rational};
use crate::structure::{find_clusters, GadgetFinder, NeighborDirection, SearchCaps};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DischargeError {
    #[error("discharging is only defined for k = 6, got k = {0}")]
    Unsupported(usize),
    #[error("bad input: {0}")]
    Input(String),
    #[error("ledger invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

fn input(msg: impl Into<String>) -> DischargeError {
    DischargeError::Input(msg.into())
}

fn broken(msg: impl Into<String>) -> DischargeError {
    DischargeError::Invariant(msg.into())
}

// ---------------------------------------------------------------- charges

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCharge {
    #[serde(with = "rational::serde_vec")]
    pub charges: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub total: Rational,
}

impl InitialCharge {
    /// Does the total equal `-p(G) - delta*T(G)`?
    pub fn matches_potential(&self, g: &Graph, params: &PotentialParams) -> Result<bool, DischargeError> {
        let t = clique_weight(g, params.k)?.value;
        let rhs = -potential(g, params)? - &params.delta * int(t as i64);
        Ok(self.total == rhs)
    }
}

fn charge_of(d: usize, k: usize, eps: &Rational) -> Rational {
    int(((k - 1) * d) as i64 - ((k - 2) * (k + 1)) as i64) - eps
}

/// `ch0(v) = (k-1)d(v) - (k-2)(k+1) - eps`.
pub fn initial_charge(g: &Graph, k: usize, eps: &Rational) -> InitialCharge {
    let charges: Vec<Rational> = (0..g.n()).map(|v| charge_of(g.degree(v), k, eps)).collect();
    let total = charges.iter().fold(zero(), |a, c| a + c);
    InitialCharge { charges, total }
}

/// Charge a degree-`d` vertex sends to each of `r` degree-5 neighbours.
pub fn psi(d: usize, r: usize, eps: &Rational) -> Result<Rational, DischargeError> {
    if r == 0 {
        return Err(input("psi needs r >= 1"));
    }
    Ok(charge_of(d, 6, eps) / int(r as i64))
}

pub fn happy_threshold(eps: &Rational) -> Rational {
    int(2) + int(2) * eps
}

pub fn is_happy(charge: &Rational, eps: &Rational) -> bool {
    *charge >= happy_threshold(eps)
}

pub fn is_satisfied(charge: &Rational) -> bool {
    !charge.is_negative()
}

// ---------------------------------------------------------------- hooks

/// Direction of a degree-5 vertex relative to a degree-6 or 7 neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upward,
    Downward,
    /// Treated as upward; the search behind it hit a cap.
    UpwardUnverified,
}

/// Structural facts the engine consumes.
pub trait StructureHooks {
    fn degree(&self, g: &Graph, v: usize) -> usize {
        g.degree(v)
    }
    /// Partition of the degree-5 vertices into clusters.
    fn clusters(&self, g: &Graph) -> Vec<Vec<usize>>;
    fn direction(&self, g: &Graph, x: usize, y: usize) -> Direction;
}

/// Hooks backed by the gadget search. The finder is built on first use.
pub struct GraphHooks<'a> {
    g: &'a Graph,
    caps: SearchCaps,
    finder: OnceCell<GadgetFinder<'a>>,
    cache: RefCell<HashMap<(usize, usize), Direction>>,
}

impl<'a> GraphHooks<'a> {
    pub fn new(g: &'a Graph, caps: SearchCaps) -> Self {
        GraphHooks { g, caps, finder: OnceCell::new(), cache: RefCell::new(HashMap::new()) }
    }
}

impl StructureHooks for GraphHooks<'_> {
    fn clusters(&self, _: &Graph) -> Vec<Vec<usize>> {
        find_clusters(self.g, 6).into_iter().map(|c| c.vertices).collect()
    }

    fn direction(&self, _: &Graph, x: usize, y: usize) -> Direction {
        if let Some(d) = self.cache.borrow().get(&(x, y)) {
            return *d;
        }
        let finder = self.finder.get_or_init(|| GadgetFinder::new(self.g, 6, self.caps));
        let d = match finder.direction(x, y) {
            NeighborDirection::Downward { .. } => Direction::Downward,
            NeighborDirection::Upward { search_incomplete: false } => Direction::Upward,
            NeighborDirection::Upward { search_incomplete: true } => Direction::UpwardUnverified,
            NeighborDirection::Inapplicable => Direction::Upward,
        };
        self.cache.borrow_mut().insert((x, y), d);
        d
    }
}

/// User-supplied structure for synthetic instances. Missing degrees come
/// from the graph; missing clusters group annotated degree-5 vertices by
/// closed neighbourhood; pairs not listed as downward are upward.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Annotations {
    pub degrees: Option<Vec<usize>>,
    pub clusters: Option<Vec<Vec<usize>>>,
    /// `[x, y]`: `x` is a downward neighbour of `y`.
    pub downward: Vec<[usize; 2]>,
}

impl Annotations {
    /// Every listed vertex exists and `degrees` covers the whole graph.
    pub fn check(&self, g: &Graph) -> Result<(), DischargeError> {
        let n = g.n();
        if let Some(d) = &self.degrees {
            if d.len() != n {
                return Err(input(format!("{} degrees annotated for {n} vertices", d.len())));
            }
        }
        let listed = self.clusters.iter().flatten().flatten().chain(self.downward.iter().flatten());
        if let Some(v) = listed.into_iter().find(|&&v| v >= n) {
            return Err(input(format!("annotated vertex {v} out of range")));
        }
        Ok(())
    }
}

impl StructureHooks for Annotations {
    fn degree(&self, g: &Graph, v: usize) -> usize {
        match &self.degrees {
            Some(d) => d[v],
            None => g.degree(v),
        }
    }

    fn clusters(&self, g: &Graph) -> Vec<Vec<usize>> {
        if let Some(c) = &self.clusters {
            return c.clone();
        }
        let mut groups: Vec<(VertexSet, Vec<usize>)> = Vec::new();
        for v in (0..g.n()).filter(|&v| self.degree(g, v) == 5) {
            let key = g.closed_neighbors(v);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, vs)) => vs.push(v),
                None => groups.push((key, vec![v])),
            }
        }
        groups.into_iter().map(|(_, vs)| vs).collect()
    }

    fn direction(&self, _: &Graph, x: usize, y: usize) -> Direction {
        if self.downward.contains(&[x, y]) {
            Direction::Downward
        } else {
            Direction::Upward
        }
    }
}

// ---------------------------------------------------------------- ledger

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "1")]
    R1,
    #[serde(rename = "2A")]
    R2A,
    #[serde(rename = "2B")]
    R2B,
    #[serde(rename = "3A")]
    R3A,
    #[serde(rename = "3B")]
    R3B,
    #[serde(rename = "4")]
    R4,
    #[serde(rename = "5")]
    R5,
    #[serde(rename = "6-redistribute")]
    R6Redistribute,
    #[serde(rename = "6-triangle")]
    R6Triangle,
}

impl Rule {
    pub fn stage(self) -> usize {
        match self {
            Rule::R1 => 1,
            Rule::R2A | Rule::R2B => 2,
            Rule::R3A | Rule::R3B => 3,
            Rule::R4 => 4,
            Rule::R5 => 5,
            Rule::R6Redistribute | Rule::R6Triangle => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub stage: usize,
    pub rule: Rule,
    pub from: usize,
    pub to: usize,
    #[serde(with = "rational::serde_str")]
    pub amount: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCharges {
    pub stage: usize,
    #[serde(with = "rational::serde_vec")]
    pub charges: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub total: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStatus {
    pub vertices: Vec<usize>,
    /// Indexed by stage 0..=6.
    pub happy: Vec<bool>,
    pub satisfied: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DischargeParams {
    pub k: usize,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    /// Rule 2A fires only with at most this many receivers.
    pub rule2a_max_receivers: usize,
    /// Stage-2 round limit; `None` means `n + 1`.
    pub stage2_max_rounds: Option<usize>,
    /// Scan stage-2 rounds in descending vertex order.
    pub stage2_descending: bool,
}

impl Default for DischargeParams {
    fn default() -> Self {
        DischargeParams {
            k: 6,
            epsilon: frac(1, 105),
            rule2a_max_receivers: 5,
            stage2_max_rounds: None,
            stage2_descending: false,
        }
    }
}

impl DischargeParams {
    pub fn with_epsilon(epsilon: Rational) -> Self {
        DischargeParams { epsilon, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeLedger {
    pub schema_version: u32,
    pub k: usize,
    pub n: usize,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    pub degrees: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
    /// `ch_0` through `ch_6`.
    pub stages: Vec<StageCharges>,
    pub transfers: Vec<Transfer>,
    /// Stage-2 rounds run, counting the final quiet round.
    pub stage2_rounds: usize,
    pub cluster_status: Vec<ClusterStatus>,
    pub reserved: Vec<usize>,
    /// `[x, r(x)]` for every degree-5 vertex.
    pub reserve_degree: Vec<[usize; 2]>,
    /// Degree-5 components with negative charge after stage 3.
    pub unsatisfied_components: Vec<Vec<usize>>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub ab_edges: usize,
    /// Degree-6 senders whose three upward neighbours had two or more
    /// edges among them; Rule 3B was skipped there.
    pub rule3b_skipped: Vec<usize>,
    /// Some direction came from a capped search.
    pub partial: bool,
    pub notes: Vec<String>,
}

impl ChargeLedger {
    pub fn charges(&self, stage: usize) -> &[Rational] {
        &self.stages[stage].charges
    }

    pub fn is_conserved(&self) -> bool {
        self.stages.iter().all(|s| s.total == self.stages[0].total)
    }

    /// Replays the transfer log from `ch_0` and checks every snapshot, the
    /// totals and each amount against its rule.
    pub fn validate(&self, g: &Graph) -> Result<(), DischargeError> {
        if g.n() != self.n || self.degrees.len() != self.n || self.stages.len() != 7 {
            return Err(broken("ledger shape does not match the graph"));
        }
        let eps = &self.epsilon;
        let ch0: Vec<Rational> = self.degrees.iter().map(|&d| charge_of(d, 6, eps)).collect();
        if ch0 != self.stages[0].charges {
            return Err(broken("stage 0 is not the initial charge"));
        }
        let mut cur = ch0.clone();
        let mut t = 0;
        for stage in 1..=6 {
            while t < self.transfers.len() && self.transfers[t].stage == stage {
                let tr = &self.transfers[t];
                if tr.rule.stage() != stage {
                    return Err(broken(format!("transfer {t} is logged in the wrong stage")));
                }
                self.check_amount(g, tr, &ch0)?;
                cur[tr.from] -= &tr.amount;
                cur[tr.to] += &tr.amount;
                t += 1;
            }
            if cur != self.stages[stage].charges {
                return Err(broken(format!("replay disagrees with stage {stage}")));
            }
        }
        if t != self.transfers.len() {
            return Err(broken("transfer log is out of stage order"));
        }
        for s in &self.stages {
            let sum = s.charges.iter().fold(zero(), |a, c| a + c);
            if sum != s.total {
                return Err(broken(format!("stage {} total is misreported", s.stage)));
            }
        }
        if !self.is_conserved() {
            return Err(broken("total charge changed between stages"));
        }
        Ok(())
    }

    fn check_amount(&self, g: &Graph, tr: &Transfer, ch0: &[Rational]) -> Result<(), DischargeError> {
        let eps = &self.epsilon;
        let bad = || {
            broken(format!(
                "{:?} transfer {} -> {} has amount {}",
                tr.rule,
                tr.from,
                tr.to,
                rational::to_string(&tr.amount)
            ))
        };
        let times = |r: usize| &tr.amount * int(r as i64);
        let ok = match tr.rule {
            Rule::R1 => {
                let r = g.neighbors(tr.from).iter().filter(|&w| self.degrees[w] == 5).count();
                times(r) == ch0[tr.from]
            }
            Rule::R2A => (1..=5).any(|r| times(r) == ch0[tr.from]),
            Rule::R2B => {
                let size = self.clusters.iter().find(|c| c.contains(&tr.to)).map_or(1, |c| c.len());
                times(size) == int(2) - eps
            }
            Rule::R3A | Rule::R6Redistribute => tr.amount.is_positive(),
            Rule::R3B => {
                (1..=2).any(|m| times(m) == int(2) - eps)
                    || tr.amount == int(1) - eps / int(2)
                    || tr.amount == frac(1, 2) - eps / int(4)
            }
            Rule::R4 => times(self.b.len()) == frac(4, 5) + eps / int(5),
            Rule::R5 => tr.amount == frac(4, 5) + eps / int(5),
            Rule::R6Triangle => tr.amount == frac(2, 5) - frac(7, 5) * eps,
        };
        if ok {
            Ok(())
        } else {
            Err(bad())
        }
    }
}

// ---------------------------------------------------------------- engine

struct Engine<'a> {
    g: &'a Graph,
    eps: Rational,
    deg: Vec<usize>,
    cur: Vec<Rational>,
    snaps: Vec<Vec<Rational>>,
    transfers: Vec<Transfer>,
    cluster_id: Vec<Option<usize>>,
    clusters: Vec<Vec<usize>>,
    discharged: Vec<bool>,
    partial: bool,
    notes: Vec<String>,
}

impl Engine<'_> {
    fn send(&mut self, rule: Rule, from: usize, to: usize, amount: Rational) {
        self.cur[from] -= &amount;
        self.cur[to] += &amount;
        self.transfers.push(Transfer { stage: rule.stage(), rule, from, to, amount });
    }

    fn snapshot(&mut self) {
        self.snaps.push(self.cur.clone());
    }

    fn low(&self, v: usize) -> VertexSet {
        let mut s = VertexSet::new();
        for w in self.g.neighbors(v).iter() {
            if self.deg[w] == 5 {
                s.insert(w);
            }
        }
        s
    }

    fn cluster_charge(&self, c: usize, charges: &[Rational]) -> Rational {
        self.clusters[c].iter().fold(zero(), |a, &v| a + &charges[v])
    }

    fn vertex_happy(&self, x: usize, charges: &[Rational]) -> bool {
        match self.cluster_id[x] {
            Some(c) => is_happy(&self.cluster_charge(c, charges), &self.eps),
            None => is_happy(&charges[x], &self.eps),
        }
    }

    fn dir(&mut self, hooks: &dyn StructureHooks, x: usize, y: usize) -> bool {
        match hooks.direction(self.g, x, y) {
            Direction::Upward => true,
            Direction::Downward => false,
            Direction::UpwardUnverified => {
                self.partial = true;
                true
            }
        }
    }

    fn unhappy_clusters(&self) -> Vec<usize> {
        (0..self.clusters.len()).filter(|&c| !is_happy(&self.cluster_charge(c, &self.cur), &self.eps)).collect()
    }

    fn stage1(&mut self) {
        for v in 0..self.g.n() {
            if self.deg[v] < 8 {
                continue;
            }
            let low = self.low(v);
            if low.is_empty() {
                continue;
            }
            let share = self.cur[v].clone() / int(low.len() as i64);
            for x in low.iter() {
                self.send(Rule::R1, v, x, share.clone());
            }
            self.discharged[v] = true;
        }
    }

    fn rule2a(&mut self, hooks: &dyn StructureHooks, v: usize, max_r: usize, ch0: &Rational) -> bool {
        let mut recv = Vec::new();
        for x in self.low(v).iter() {
            if !self.vertex_happy(x, &self.cur) && self.dir(hooks, x, v) {
                recv.push(x);
            }
        }
        if recv.is_empty() || recv.len() > max_r {
            return false;
        }
        let share = ch0 / int(recv.len() as i64);
        for x in recv {
            // Guard at send time: an earlier share may already have made
            // this cluster happy.
            if !self.vertex_happy(x, &self.cur) {
                self.send(Rule::R2A, v, x, share.clone());
            }
        }
        true
    }

    fn rule2b(&mut self, hooks: &dyn StructureHooks, v: usize) -> bool {
        let mut adjacent: Vec<usize> = Vec::new();
        let mut downward: Vec<usize> = Vec::new();
        for x in self.low(v).iter() {
            let c = self.cluster_id[x].expect("degree-5 vertex has a cluster");
            if !adjacent.contains(&c) {
                adjacent.push(c);
            }
            if !self.dir(hooks, x, v) && !downward.contains(&c) {
                downward.push(c);
            }
        }
        let targets: Vec<usize> = adjacent
            .into_iter()
            .filter(|c| !downward.contains(c))
            .filter(|&c| !is_happy(&self.cluster_charge(c, &self.cur), &self.eps))
            .collect();
        if targets.len() != 1 {
            return false;
        }
        let members = self.clusters[targets[0]].clone();
        let share = (int(2) - &self.eps) / int(members.len() as i64);
        for x in members {
            self.send(Rule::R2B, v, x, share.clone());
        }
        true
    }

    fn stage2(&mut self, hooks: &dyn StructureHooks, p: &DischargeParams) -> Result<usize, DischargeError> {
        let n = self.g.n();
        let max_rounds = p.stage2_max_rounds.unwrap_or(n + 1);
        let order: Vec<usize> = if p.stage2_descending { (0..n).rev().collect() } else { (0..n).collect() };
        let mut unhappy = self.unhappy_clusters();
        let mut rounds = 0;
        loop {
            if rounds == max_rounds {
                return Err(broken(format!("stage 2 did not settle within {max_rounds} rounds")));
            }
            rounds += 1;
            let mut fired = false;
            for &v in &order {
                if self.discharged[v] {
                    continue;
                }
                let ch0 = charge_of(self.deg[v], 6, &self.eps);
                let f = match self.deg[v] {
                    7 => self.rule2a(hooks, v, p.rule2a_max_receivers, &ch0),
                    6 => self.rule2b(hooks, v),
                    _ => false,
                };
                if f {
                    self.discharged[v] = true;
                    fired = true;
                }
            }
            let now = self.unhappy_clusters();
            if now.iter().any(|c| !unhappy.contains(c)) {
                return Err(broken("a happy cluster became unhappy during stage 2"));
            }
            unhappy = now;
            if !fired {
                return Ok(rounds);
            }
        }
    }

    fn stage3(&mut self, hooks: &dyn StructureHooks) -> Vec<usize> {
        let g = self.g;
        let ch2 = self.snaps[2].clone();
        let mut skipped = Vec::new();
        for v in 0..g.n() {
            if self.deg[v] < 7 || !self.cur[v].is_positive() {
                continue;
            }
            let low = self.low(v);
            if low.is_empty() {
                continue;
            }
            let share = self.cur[v].clone() / int(low.len() as i64);
            for x in low.iter() {
                self.send(Rule::R3A, v, x, share.clone());
            }
            self.discharged[v] = true;
        }
        for v in 0..g.n() {
            if self.deg[v] != 6 || self.discharged[v] {
                continue;
            }
            let low = self.low(v);
            let unhappy: Vec<usize> = low.iter().filter(|&x| !self.vertex_happy(x, &ch2)).collect();
            if !unhappy.is_empty() && unhappy.len() <= 2 {
                let share = self.cur[v].clone() / int(unhappy.len() as i64);
                for x in unhappy {
                    self.send(Rule::R3B, v, x, share.clone());
                }
                self.discharged[v] = true;
                continue;
            }
            if unhappy.is_empty() {
                continue;
            }
            let up: Vec<usize> = low.iter().filter(|&x| self.dir(hooks, x, v)).collect();
            if up.len() != 3 {
                continue;
            }
            let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
            let edges = pairs.iter().filter(|&&(a, b, _)| g.has_edge(up[a], up[b])).count();
            if edges >= 2 {
                skipped.push(v);
                continue;
            }
            let Some(&(a, b, c)) = pairs.iter().find(|&&(a, b, _)| g.has_edge(up[a], up[b])) else {
                continue;
            };
            let half = frac(1, 2) - &self.eps / int(4);
            self.send(Rule::R3B, v, up[c], int(1) - &self.eps / int(2));
            self.send(Rule::R3B, v, up[a], half.clone());
            self.send(Rule::R3B, v, up[b], half);
            self.discharged[v] = true;
        }
        skipped
    }
}

fn outer_neighbours(g: &Graph, a: &VertexSet) -> VertexSet {
    a.iter().fold(VertexSet::new(), |acc, v| acc.union(g.neighbors(v))).difference(a)
}

fn sum_over(charges: &[Rational], vs: impl IntoIterator<Item = usize>) -> Rational {
    vs.into_iter().fold(zero(), |a, v| a + &charges[v])
}

/// Runs stages 1 to 6 and returns the validated ledger.
pub fn run_discharge(
    g: &Graph,
    params: &DischargeParams,
    hooks: &dyn StructureHooks,
) -> Result<ChargeLedger, DischargeError> {
    if params.k != 6 {
        return Err(DischargeError::Unsupported(params.k));
    }
    if params.epsilon.is_negative() {
        return Err(input("epsilon must be non-negative"));
    }
    let n = g.n();
    let eps = params.epsilon.clone();
    let deg: Vec<usize> = (0..n).map(|v| hooks.degree(g, v)).collect();
    let mut clusters = hooks.clusters(g);
    for c in clusters.iter_mut() {
        c.sort_unstable();
    }
    clusters.sort();
    let mut cluster_id = vec![None; n];
    for (i, c) in clusters.iter().enumerate() {
        for &v in c {
            if v >= n || deg[v] != 5 || cluster_id[v].is_some() {
                return Err(input(format!("cluster {c:?} is not a part of a partition of degree-5 vertices")));
            }
            cluster_id[v] = Some(i);
        }
    }
    if let Some(v) = (0..n).find(|&v| deg[v] == 5 && cluster_id[v].is_none()) {
        return Err(input(format!("degree-5 vertex {v} has no cluster")));
    }
    let cur: Vec<Rational> = deg.iter().map(|&d| charge_of(d, 6, &eps)).collect();
    let mut e = Engine {
        g,
        eps: eps.clone(),
        deg: deg.clone(),
        cur,
        snaps: Vec::new(),
        transfers: Vec::new(),
        cluster_id,
        clusters: clusters.clone(),
        discharged: vec![false; n],
        partial: false,
        notes: Vec::new(),
    };
    e.snapshot();
    e.stage1();
    e.snapshot();
    let stage2_rounds = e.stage2(hooks, params)?;
    e.snapshot();
    let rule3b_skipped = e.stage3(hooks);
    e.snapshot();

    let reserved: Vec<usize> = (0..n).filter(|&v| deg[v] == 6 && !e.discharged[v]).collect();
    let reserved_set = VertexSet::from_slice(&reserved);
    let low_set = VertexSet::from_slice(&(0..n).filter(|&v| deg[v] == 5).collect::<Vec<_>>());
    let r = |x: usize| g.neighbors(x).intersection(&reserved_set).len();
    let reserve_degree: Vec<[usize; 2]> = low_set.iter().map(|x| [x, r(x)]).collect();
    let comps = g.components_within(&low_set);
    let ch3 = e.snaps[3].clone();
    let unsatisfied: Vec<VertexSet> =
        comps.iter().filter(|s| sum_over(&ch3, s.iter()).is_negative()).copied().collect();
    let mut a: Vec<usize> = unsatisfied
        .iter()
        .map(|s| s.iter().max_by_key(|&x| (r(x), std::cmp::Reverse(x))).expect("component is non-empty"))
        .collect();
    a.sort_unstable();
    let a_set = VertexSet::from_slice(&a);
    if !g.is_independent(&a_set) || a.iter().any(|&x| deg[x] != 5) {
        return Err(broken("A must be an independent set of degree-5 vertices"));
    }
    let b_set = outer_neighbours(g, &a_set).intersection(&reserved_set);
    let b = b_set.to_vec();
    let ab_edges: usize = a.iter().map(|&x| g.neighbors(x).intersection(&b_set).len()).sum();
    let unit = frac(4, 5) + &eps / int(5);

    // Stage 4.
    if !a.is_empty() {
        if b.is_empty() {
            e.notes.push("rule 4 skipped: B is empty".into());
        } else {
            let share = unit.clone() / int(b.len() as i64);
            for &x in &a {
                for &w in &b {
                    e.send(Rule::R4, x, w, share.clone());
                }
            }
        }
    }
    e.snapshot();
    // Stage 5.
    for &x in &a {
        for w in g.neighbors(x).intersection(&b_set).iter() {
            e.send(Rule::R5, w, x, unit.clone());
        }
    }
    e.snapshot();
    // Stage 6.
    let floor = frac(2, 5) - frac(7, 5) * &eps;
    if !b.is_empty() {
        let ch5b = sum_over(&e.cur, b.iter().copied());
        if ab_edges <= a.len() + 2 * b.len() {
            if ch5b < &floor * int(b.len() as i64) {
                return Err(broken("B cannot fund rule 6 although the independent-set bound holds"));
            }
        } else {
            e.notes.push(format!("|E(A,B)| = {ab_edges} exceeds |A| + 2|B|; rule 6 funding not asserted"));
        }
        let mean = ch5b / int(b.len() as i64);
        let mut excess: Vec<(usize, Rational)> =
            b.iter().filter(|&&w| e.cur[w] > mean).map(|&w| (w, &e.cur[w] - &mean)).collect();
        let mut need: Vec<(usize, Rational)> =
            b.iter().filter(|&&w| e.cur[w] < mean).map(|&w| (w, &mean - &e.cur[w])).collect();
        let (mut i, mut j) = (0, 0);
        while i < excess.len() && j < need.len() {
            let amt = excess[i].1.clone().min(need[j].1.clone());
            e.send(Rule::R6Redistribute, excess[i].0, need[j].0, amt.clone());
            excess[i].1 -= &amt;
            need[j].1 -= &amt;
            if excess[i].1.is_zero() {
                i += 1;
            }
            if need[j].1.is_zero() {
                j += 1;
            }
        }
        let triangles: Vec<&VertexSet> = comps.iter().filter(|s| s.len() == 3 && g.is_clique(s)).collect();
        for &w in &b {
            for t in &triangles {
                if let Some(x) = g.neighbors(w).intersection(t).first() {
                    e.send(Rule::R6Triangle, w, x, floor.clone());
                }
            }
        }
        e.notes.push(
            "rule 4 splits its charge equally over B; rule 6 equalises B and pays each triangle at its least neighbour"
                .into(),
        );
    }
    e.snapshot();

    let stages: Vec<StageCharges> = e
        .snaps
        .iter()
        .enumerate()
        .map(|(i, c)| StageCharges { stage: i, total: sum_over(c, 0..n), charges: c.clone() })
        .collect();
    let cluster_status = clusters
        .iter()
        .map(|c| {
            let sums: Vec<Rational> = e.snaps.iter().map(|s| sum_over(s, c.iter().copied())).collect();
            ClusterStatus {
                vertices: c.clone(),
                happy: sums.iter().map(|s| is_happy(s, &eps)).collect(),
                satisfied: sums.iter().map(is_satisfied).collect(),
            }
        })
        .collect();
    let ledger = ChargeLedger {
        schema_version: SCHEMA_VERSION,
        k: 6,
        n,
        epsilon: eps,
        degrees: deg,
        clusters,
        stages,
        transfers: e.transfers,
        stage2_rounds,
        cluster_status,
        reserved,
        reserve_degree,
        unsatisfied_components: unsatisfied.iter().map(|s| s.to_vec()).collect(),
        a,
        b,
        ab_edges,
        rule3b_skipped,
        partial: e.partial,
        notes: e.notes,
    };
    ledger.validate(g)?;
    Ok(ledger)
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSatisfaction {
    pub vertices: Vec<usize>,
    #[serde(with = "rational::serde_vec")]
    pub sums: Vec<Rational>,
    pub satisfied: Vec<bool>,
    pub happy: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatisfactionReport {
    pub components: Vec<ComponentSatisfaction>,
    /// Every degree-5 component ends with non-negative charge.
    pub all_satisfied: bool,
}

/// Per-stage sums over each component of the degree-5 subgraph.
pub fn component_satisfaction(ledger: &ChargeLedger, g: &Graph) -> Result<SatisfactionReport, DischargeError> {
    if g.n() != ledger.n || ledger.stages.len() != 7 {
        return Err(input("ledger does not belong to this graph"));
    }
    let low = VertexSet::from_slice(&(0..g.n()).filter(|&v| ledger.degrees[v] == 5).collect::<Vec<_>>());
    let components: Vec<ComponentSatisfaction> = g
        .components_within(&low)
        .into_iter()
        .map(|s| {
            let sums: Vec<Rational> = ledger.stages.iter().map(|st| sum_over(&st.charges, s.iter())).collect();
            ComponentSatisfaction {
                vertices: s.to_vec(),
                satisfied: sums.iter().map(is_satisfied).collect(),
                happy: sums.iter().map(|x| is_happy(x, &ledger.epsilon)).collect(),
                sums,
            }
        })
        .collect();
    let all_satisfied = components.iter().all(|c| c.satisfied[6]);
    Ok(SatisfactionReport { components, all_satisfied })
}

/// Outcome of the subgraph-choosability cross-check on a violated bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ChoosabilityCheck {
    /// A non-empty induced subgraph of `G[A + B]` that is choosable for the
    /// reduced list sizes.
    Witness {
        vertices: Vec<usize>,
    },
    NoWitness,
    TooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBoundReport {
    pub k: usize,
    pub a: Vec<usize>,
    /// `levels[i-1]` is `B_i`, the neighbours of `A` of degree `k-1+i`.
    pub levels: Vec<Vec<usize>>,
    /// `|E(A, B_1 + ... + B_l)|`.
    pub edges: usize,
    /// `|A| + sum (i+1)|B_i|`.
    pub bound: usize,
    pub holds: bool,
    /// `|E(A, B_1)|` against `|A| + 2|B_1|`.
    pub degree_k_edges: usize,
    pub degree_k_bound: usize,
    pub degree_k_holds: bool,
    pub choosability: Option<ChoosabilityCheck>,
}

/// Largest `|A| + |B|` for which a violated bound is cross-checked.
pub const CHOOSABILITY_CHECK_MAX: usize = 10;

/// Edge count between an independent set of degree-`(k-1)` vertices and
/// its higher-degree neighbours, against the bound that holds in every
/// `k`-critical graph. Criticality is the caller's business; when the bound
/// fails on a small input, `G[A + B]` is searched for a choosable subgraph.
pub fn independent_set_edge_bound(
    g: &Graph,
    k: usize,
    a: &VertexSet,
    l: usize,
) -> Result<EdgeBoundReport, DischargeError> {
    g.check_set(a)?;
    if k < 2 {
        return Err(input("k must be at least 2"));
    }
    if !g.is_independent(a) {
        return Err(input("A is not independent"));
    }
    if let Some(v) = a.iter().find(|&v| g.degree(v) + 1 != k) {
        return Err(input(format!("vertex {v} of A does not have degree k-1")));
    }
    let nb = outer_neighbours(g, a);
    let levels: Vec<Vec<usize>> = (1..=l).map(|i| nb.iter().filter(|&v| g.degree(v) == k - 1 + i).collect()).collect();
    let b_all = VertexSet::from_slice(&levels.concat());
    let count = |b: &VertexSet| a.iter().map(|x| g.neighbors(x).intersection(b).len()).sum::<usize>();
    let edges = count(&b_all);
    let bound = a.len() + levels.iter().enumerate().map(|(i, b)| (i + 2) * b.len()).sum::<usize>();
    let b1 = VertexSet::from_slice(&nb.iter().filter(|&v| g.degree(v) == k).collect::<Vec<_>>());
    let degree_k_edges = count(&b1);
    let degree_k_bound = a.len() + 2 * b1.len();
    let holds = edges <= bound;
    let choosability = if holds { None } else { Some(choosable_witness(g, a, &levels)?) };
    Ok(EdgeBoundReport {
        k,
        a: a.to_vec(),
        levels,
        edges,
        bound,
        holds,
        degree_k_edges,
        degree_k_bound,
        degree_k_holds: degree_k_edges <= degree_k_bound,
        choosability,
    })
}

fn choosable_witness(g: &Graph, a: &VertexSet, levels: &[Vec<usize>]) -> Result<ChoosabilityCheck, DischargeError> {
    let mut all = *a;
    for b in levels {
        for &v in b {
            all.insert(v);
        }
    }
    if all.len() > CHOOSABILITY_CHECK_MAX {
        return Ok(ChoosabilityCheck::TooLarge);
    }
    let (gp, lab) = g.induced_subgraph(&all);
    let level_of = |v: usize| levels.iter().position(|b| b.contains(&v)).map(|i| i + 1);
    let f: Vec<i64> = (0..gp.n())
        .map(|i| {
            let d = gp.degree(i) as i64;
            match level_of(lab[i]) {
                Some(lvl) => (d - lvl as i64).max(0),
                None => d,
            }
        })
        .collect();
    let m = gp.n();
    let mut masks: Vec<u32> = (1..1u32 << m).collect();
    masks.sort_by_key(|s| (s.count_ones(), *s));
    for mask in masks {
        let s = VertexSet::from_slice(&(0..m).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>());
        let (h, hl) = gp.induced_subgraph(&s);
        let fh: Vec<i64> = (0..h.n()).map(|j| f[hl[j]] + h.degree(j) as i64 - gp.degree(hl[j]) as i64).collect();
        if fh.iter().any(|&x| x <= 0) {
            continue;
        }
        let fh: Vec<usize> = fh.into_iter().map(|x| x as usize).collect();
        match is_f_choosable(&h, &fh, CHOOSABILITY_CAP) {
            Ok(true) => {
                return Ok(ChoosabilityCheck::Witness { vertices: hl.iter().map(|&i| lab[i]).collect() });
            }
            Ok(false) | Err(ColoringError::ResourceLimit { .. }) => {}
            Err(e) => return Err(input(e.to_string())),
        }
    }
    Ok(ChoosabilityCheck::NoWitness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps() -> Rational {
        frac(1, 105)
    }

    #[test]
    fn initial_charge_values() {
        let e = eps();
        assert_eq!(charge_of(5, 6, &e), int(-3) - &e);
        assert_eq!(charge_of(6, 6, &e), int(2) - &e);
        assert_eq!(charge_of(8, 6, &e), int(12) - &e);
        let k6 = initial_charge(&Graph::complete(6), 6, &e);
        assert_eq!(k6.total, int(-18) - int(6) * &e);
        assert!(k6.matches_potential(&Graph::complete(6), &PotentialParams::k6()).unwrap());
        let empty = initial_charge(&Graph::new(3), 6, &e);
        assert!(empty.charges.iter().all(|c| *c == int(-28) - &e));
    }

    #[test]
    fn psi_values() {
        let e = eps();
        assert_eq!(psi(8, 7, &e).unwrap(), frac(12, 7) - &e / int(7));
        assert_eq!(psi(7, 5, &e).unwrap(), frac(7, 5) - &e / int(5));
        assert!(psi(7, 0, &e).is_err());
    }

    #[test]
    fn complete_graph_has_no_senders() {
        let g = Graph::complete(6);
        let led = run_discharge(&g, &DischargeParams::default(), &Annotations::default()).unwrap();
        assert!(led.transfers.is_empty());
        assert_eq!(led.charges(6), led.charges(0));
        assert_eq!(led.stages[6].total, int(-18) - int(6) * eps());
    }

    #[test]
    fn c5_join_k3_by_hand() {
        let g = Graph::cycle(5).join(&Graph::complete(3));
        let led = run_discharge(&g, &DischargeParams::default(), &GraphHooks::new(&g, SearchCaps::default())).unwrap();
        let e = eps();
        let c5 = frac(6, 5) - frac(8, 5) * &e;
        for v in 0..5 {
            assert_eq!(led.charges(2)[v], c5);
            assert_eq!(led.charges(6)[v], c5);
        }
        assert!(led.charges(6)[5..].iter().all(Zero::is_zero));
        assert_eq!(led.transfers.len(), 15);
        assert!(led.transfers.iter().all(|t| t.rule == Rule::R2A && t.amount == (int(7) - &e) / int(5)));
        assert_eq!(led.stage2_rounds, 2);
        assert!(led.reserved.is_empty() && led.a.is_empty() && led.b.is_empty());
        assert_eq!(led.stages[0].total, int(6) - int(8) * &e);
    }

    #[test]
    fn only_k6_is_supported() {
        let g = Graph::complete(6);
        let p = DischargeParams { k: 5, ..Default::default() };
        assert_eq!(run_discharge(&g, &p, &Annotations::default()), Err(DischargeError::Unsupported(5)));
    }

    #[test]
    fn happy_boundary_is_exact() {
        let e = eps();
        assert!(is_happy(&happy_threshold(&e), &e));
        assert!(!is_happy(&(happy_threshold(&e) - frac(1, 1_000_000)), &e));
    }

    #[test]
    fn edge_bound_on_c5_join_k3() {
        let g = Graph::cycle(5).join(&Graph::complete(3));
        let rep = independent_set_edge_bound(&g, 6, &VertexSet::from_slice(&[0, 2]), 2).unwrap();
        assert_eq!(rep.levels, vec![vec![], vec![5, 6, 7]]);
        assert_eq!((rep.edges, rep.bound, rep.holds), (6, 11, true));
        let rep = independent_set_edge_bound(&g, 6, &VertexSet::new(), 2).unwrap();
        assert_eq!((rep.edges, rep.bound), (0, 0));
        assert!(independent_set_edge_bound(&g, 6, &VertexSet::from_slice(&[0, 1]), 2).is_err());
    }
}
