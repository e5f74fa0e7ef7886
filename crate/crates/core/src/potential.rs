//! Clique weight `T`, the degree potential `p_bar` and the weighted potential
//! `p = p_bar + eps |V| - delta T`, all exact.

use crate::cliques::{cliques_of_size, max_weight_disjoint};
use crate::coloring::is_critical;
use crate::graph::{Graph, VertexSet};
use crate::ore::{recognize_k_ore, Recognition, RECOGNITION_BUDGET};
use crate::rational::{self, frac, int, Rational};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PotentialError {
    #[error("k = {0} is too small (need k >= 3)")]
    BadK(usize),
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("parameters violate: {}", .0.join("; "))]
    Violated(Vec<String>),
}

/// `T(G)`: the largest `2a + b` over vertex-disjoint families of `a` copies
/// of `K_{k-1}` and `b` copies of `K_{k-2}`, with one optimal family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueWeight {
    pub value: u64,
    pub family: Vec<Vec<usize>>,
}

pub fn clique_weight(g: &Graph, k: usize) -> Result<CliqueWeight, PotentialError> {
    if k < 3 {
        return Err(PotentialError::BadK(k));
    }
    let mut cands: Vec<(VertexSet, u64)> = cliques_of_size(g, k - 1).into_iter().map(|s| (s, 2)).collect();
    cands.extend(cliques_of_size(g, k - 2).into_iter().map(|s| (s, 1)));
    // Best weight per vertex is 2/(k-1) for k >= 3.
    let bound = move |c: usize| (2 * c / (k - 1)) as u64;
    let p = max_weight_disjoint(&cands, &bound);
    Ok(CliqueWeight { value: p.value, family: p.chosen.iter().map(|&i| cands[i].0.to_vec()).collect() })
}

/// `(k-2)(k+1)|V| - 2(k-1)|E|`.
pub fn ky_potential(g: &Graph, k: usize) -> i64 {
    ((k as i64 - 2) * (k as i64 + 1)) * g.n() as i64 - 2 * (k as i64 - 1) * g.edge_count() as i64
}

/// The constants of the weighted potential.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub k: usize,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
    #[serde(with = "rational::serde_str")]
    pub p: Rational,
    #[serde(with = "rational::serde_str")]
    pub q: Rational,
    #[serde(with = "rational::serde_str")]
    pub big_delta: Rational,
    #[serde(with = "rational::serde_str")]
    pub gamma: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseCheck {
    pub clause: String,
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub holds: bool,
    pub equality: bool,
}

impl PotentialParams {
    /// Validated constructor.
    pub fn new(
        k: usize,
        epsilon: Rational,
        delta: Rational,
        p: Rational,
        q: Rational,
        big_delta: Rational,
        gamma: Rational,
    ) -> Result<Self, PotentialError> {
        let s = PotentialParams { k, epsilon, delta, p, q, big_delta, gamma };
        s.validate()?;
        Ok(s)
    }

    /// `eps = 1/105`, `delta = 10/105`, `P = 20/21`, `Q = 2/7`, `Delta = 32/21`,
    /// `Gamma = 2 + 10/105` for `k = 6`.
    pub fn k6() -> Self {
        Self::new(6, frac(1, 105), frac(10, 105), frac(20, 21), frac(2, 7), frac(32, 21), int(2) + frac(10, 105))
            .expect("k = 6 constants are consistent")
    }

    /// Every inequality tight: `delta = 2(k-1)eps`, `Gamma = 2 + delta`,
    /// `Q = 1 - (5k/4)delta`, and `P`, `Delta` at their lower limits.
    /// For `k = 6` and `eps = 1/105` this is [`PotentialParams::k6`].
    pub fn tight(k: usize, epsilon: Rational) -> Result<Self, PotentialError> {
        if k < 3 {
            return Err(PotentialError::BadK(k));
        }
        let kk = int(k as i64);
        let delta = int(2) * (&kk - int(1)) * &epsilon;
        let gamma = int(2) + &delta;
        let q = int(1) - frac(5 * k as i64, 4) * &delta;
        let p = &q + (&kk + int(1)) * &delta;
        let big_delta = &p + &q + &kk / int(2) * &delta;
        if q.is_negative() {
            return Err(PotentialError::Violated(vec!["Q >= 0".into()]));
        }
        Self::new(k, epsilon, delta, p, q, big_delta, gamma)
    }

    pub fn report(&self) -> Vec<ClauseCheck> {
        let k = int(self.k as i64);
        let d = &self.delta;
        let le = |clause: &str, lhs: Rational, rhs: Rational| ClauseCheck {
            clause: clause.to_string(),
            holds: lhs <= rhs,
            equality: lhs == rhs,
            lhs,
            rhs,
        };
        let mut eq = le("delta = 2(k-1)eps", d.clone(), int(2) * (&k - int(1)) * &self.epsilon);
        eq.holds = eq.equality;
        vec![
            eq,
            le("2 + delta <= Gamma", int(2) + d, self.gamma.clone()),
            le("Gamma <= k - 2", self.gamma.clone(), &k - int(2)),
            le("(Gamma - 2) + Q + k delta <= P", &self.gamma - int(2) + &self.q + &k * d, self.p.clone()),
            le("P + Q + (k/2) delta <= Delta", &self.p + &self.q + &k / int(2) * d, self.big_delta.clone()),
            le("Delta + (k-1) delta <= 2", &self.big_delta + (&k - int(1)) * d, int(2)),
        ]
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if self.k < 3 {
            return Err(PotentialError::BadK(self.k));
        }
        if !self.epsilon.is_positive() {
            return Err(PotentialError::NonPositiveEpsilon);
        }
        let bad: Vec<String> = self.report().into_iter().filter(|c| !c.holds).map(|c| c.clause).collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(PotentialError::Violated(bad))
        }
    }

    fn k_r(&self) -> Rational {
        int(self.k as i64)
    }

    /// `k(k-3)`.
    pub fn ky_bound(&self) -> Rational {
        let k = self.k_r();
        &k * (&k - int(3))
    }

    /// `k(k-3) - P - Q + i delta`: the `i`-tightness threshold.
    pub fn tight_threshold(&self, i: u32) -> Rational {
        self.ky_bound() - &self.p - &self.q + int(i as i64) * &self.delta
    }
}

/// `p(G) = p_bar + eps |V| - delta T`.
pub fn potential(g: &Graph, params: &PotentialParams) -> Result<Rational, PotentialError> {
    let t = clique_weight(g, params.k)?.value;
    Ok(potential_from(g.n(), ky_potential(g, params.k), t, params))
}

fn potential_from(n: usize, ky: i64, t: u64, params: &PotentialParams) -> Rational {
    int(ky) + &params.epsilon * int(n as i64) - &params.delta * int(t as i64)
}

/// `p_G(R) = p(G[R])`.
pub fn subset_potential(g: &Graph, r: &VertexSet, params: &PotentialParams) -> Result<Rational, PotentialError> {
    potential(&g.induced_subgraph(r).0, params)
}

/// `y_k`: 2, 4 and `k^2 - 5k + 2` for `k = 4`, `5` and `k >= 6`.
pub fn strong_ky_slack(k: usize) -> i64 {
    match k {
        4 => 2,
        5 => 4,
        _ => {
            let k = k as i64;
            k * k - 5 * k + 2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub status: ClaimStatus,
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    pub relation: String,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Claim {
    pub(crate) fn cmp(name: &str, lhs: Rational, relation: &str, rhs: Rational, applies: bool) -> Claim {
        let ok = match relation {
            "<=" => lhs <= rhs,
            ">=" => lhs >= rhs,
            "==" => lhs == rhs,
            "<" => lhs < rhs,
            ">" => lhs > rhs,
            _ => unreachable!("unknown relation {relation}"),
        };
        let status = match (applies, ok) {
            (false, _) => ClaimStatus::Inapplicable,
            (true, true) => ClaimStatus::Pass,
            (true, false) => ClaimStatus::Fail,
        };
        Claim { name: name.to_string(), status, lhs, relation: relation.to_string(), rhs, note: None }
    }

    pub(crate) fn note(mut self, s: &str) -> Self {
        self.note = Some(s.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub schema_version: u32,
    pub k: usize,
    pub n: usize,
    pub edges: usize,
    pub critical: bool,
    /// `None` when recognition ran out of budget.
    pub k_ore: Option<bool>,
    pub ky_potential: i64,
    pub clique_weight: u64,
    #[serde(with = "rational::serde_str")]
    pub potential: Rational,
    pub claims: Vec<Claim>,
    /// Largest `i <= 3` with `p > k(k-3) - P - Q + i delta`. Goodness is
    /// treated as vacuous.
    pub tightness: Option<u32>,
}

impl DensityReport {
    pub fn failures(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| c.status == ClaimStatus::Fail)
    }
}

/// Check the density bounds for critical graphs against `g`. Claims that do
/// not apply (non-critical input, wrong Ore status) are marked inapplicable.
pub fn check_density_theorems(g: &Graph, params: &PotentialParams) -> Result<DensityReport, PotentialError> {
    params.validate()?;
    let k = params.k;
    let kr = int(k as i64);
    let n = g.n();
    let nr = int(n as i64);
    let critical = is_critical(g, k);
    let k_ore = if critical {
        match recognize_k_ore(g, k, RECOGNITION_BUDGET).map_err(|_| PotentialError::BadK(k))? {
            Recognition::KOre { .. } => Some(true),
            Recognition::NotKOre => Some(false),
            Recognition::BudgetExhausted { .. } => None,
        }
    } else {
        None
    };
    let ky = ky_potential(g, k);
    let t = clique_weight(g, k)?.value;
    let p = potential_from(n, ky, t, params);
    let is_kk = n == k && k_ore == Some(true);
    let ore = k_ore == Some(true);
    let non_ore = k_ore == Some(false);
    let mut claims = vec![
        Claim::cmp("ky-bound", int(ky), "<=", params.ky_bound(), critical),
        Claim::cmp(
            "ky-equality-iff-ore",
            int((ky == k as i64 * (k as i64 - 3)) as i64),
            "==",
            int(ore as i64),
            critical && k_ore.is_some(),
        )
        .note("1 if p_bar = k(k-3); compared with 1 if k-Ore"),
        Claim::cmp("strong-ky", int(ky), "<=", int(strong_ky_slack(k)), critical && non_ore),
    ];
    if is_kk {
        claims.push(Claim::cmp(
            "ore-potential",
            p.clone(),
            "==",
            params.ky_bound() + &params.epsilon * &kr - int(2) * &params.delta,
            true,
        ));
    } else {
        let two_plus = int(2) + (&nr - int(1)) / (&kr - int(1));
        claims.push(Claim::cmp(
            "ore-potential",
            p.clone(),
            "<=",
            params.ky_bound() + &params.epsilon * &nr - &two_plus * &params.delta,
            critical && ore,
        ));
        claims.push(Claim::cmp("ore-clique-weight", int(t as i64), ">=", two_plus, critical && ore));
    }
    let mut c = Claim::cmp("non-ore-potential", p.clone(), "<=", params.ky_bound() - &params.p, critical && non_ore);
    if k != 6 {
        c = c.note("proved for k = 6; checked here as a conjecture");
    }
    claims.push(c);
    if critical && k_ore.is_none() {
        for c in &mut claims {
            if c.name != "ky-bound" {
                c.status = ClaimStatus::Inapplicable;
                c.note = Some("k-Ore recognition budget exhausted".into());
            }
        }
    }
    let tightness = if critical { (0..=3).rev().find(|&i| p > params.tight_threshold(i)) } else { None };
    Ok(DensityReport {
        schema_version: SCHEMA_VERSION,
        k,
        n,
        edges: g.edge_count(),
        critical,
        k_ore,
        ky_potential: ky,
        clique_weight: t,
        potential: p,
        claims,
        tightness,
    })
}
