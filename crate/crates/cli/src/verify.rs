//! The `verify` suites. Each graph gets a status and a JSON report; the run
//! passes when no applicable check fails or is left undecided.

use clap::ValueEnum;
use critgraph::cliques::cliques_of_size;
use critgraph::coloring::is_critical;
use critgraph::extension::{
    all_extensions, find_i_edge_addition_among, is_i_collapsible, Collapsibility, EdgeAdditionOutcome, ExtensionCaps,
    ExtensionOutcome,
};
use critgraph::ore::{recognize_k_ore, Recognition};
use critgraph::potential::{check_density_theorems, ClaimStatus, ClauseCheck, PotentialParams, SCHEMA_VERSION};
use critgraph::structure::{check_structural_lemmas, find_gems, Hypothesis, LemmaStatus};
use critgraph::{Graph, VertexSet};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{self, Budget};
use crate::{map_graphs, to_json, write_out, CliError, Format, Result, VerifyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ky,
    OreBounds,
    Gems,
    Collapse,
    Lemmas,
    Assumption1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Inapplicable,
    Pass,
    /// A search hit its cap before deciding.
    Inconclusive,
    Fail,
}

#[derive(Serialize)]
struct GraphVerdict {
    index: usize,
    graph6: String,
    status: Status,
    report: Value,
}

#[derive(Serialize)]
struct NumberedClause {
    number: usize,
    #[serde(flatten)]
    check: ClauseCheck,
}

#[derive(Serialize)]
struct VerifyOutput {
    schema_version: u32,
    command: &'static str,
    suite: Suite,
    k: usize,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<PotentialParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clauses: Option<Vec<NumberedClause>>,
    graphs: Vec<GraphVerdict>,
}

pub fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let c = &a.common;
    let budget = Budget::from_env()?;
    let mut out = VerifyOutput {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        suite: a.suite,
        k: c.k,
        status: Status::Inapplicable,
        params: None,
        clauses: None,
        graphs: Vec::new(),
    };
    match a.suite {
        Suite::Assumption1 => {
            let params = input::params(c)?;
            // the chain 2 + delta <= Gamma <= k - 2 is one clause
            let numbers = [1, 2, 2, 3, 4, 5];
            let clauses: Vec<NumberedClause> = params
                .report()
                .into_iter()
                .zip(numbers)
                .map(|(check, number)| NumberedClause { number, check })
                .collect();
            out.status = if clauses.iter().all(|c| c.check.holds) { Status::Pass } else { Status::Fail };
            out.params = Some(params);
            out.clauses = Some(clauses);
        }
        suite => {
            let needs_params = matches!(suite, Suite::Ky | Suite::OreBounds | Suite::Lemmas);
            let params = if needs_params { Some(input::params(c)?) } else { None };
            let hypotheses = parse_hypotheses(&a.hypotheses)?;
            if a.subset.is_some() && suite != Suite::Collapse {
                return Err(CliError::Usage("--subset only applies to the collapse suite".into()));
            }
            let graphs = input::graphs(c)?;
            let k = c.k;
            if k < 3 {
                return Err(CliError::Usage(format!("k = {k} is too small")));
            }
            out.graphs = map_graphs(c.jobs, &graphs, |index, g| {
                let (status, report) = match suite {
                    Suite::Ky => ky(g, params.as_ref().unwrap())?,
                    Suite::OreBounds => ore_bounds(g, params.as_ref().unwrap(), budget)?,
                    Suite::Gems => gems(g, k, budget)?,
                    Suite::Collapse => collapse(g, k, a.subset.as_deref(), a.i, budget.extension_caps())?,
                    Suite::Lemmas => lemmas(g, params.as_ref().unwrap(), &hypotheses, budget)?,
                    Suite::Assumption1 => unreachable!(),
                };
                Ok(GraphVerdict { index, graph6: g.to_graph6(), status, report })
            })?;
            out.params = params;
            out.status = out.graphs.iter().map(|v| v.status).max().unwrap_or(Status::Inapplicable);
        }
    }
    let text = match c.format {
        Format::Json => to_json(&out),
        Format::Text => text_report(&out),
    };
    write_out(c.output.as_deref(), &text)?;
    Ok(match out.status {
        Status::Pass | Status::Inapplicable => 0,
        Status::Fail | Status::Inconclusive => 1,
    })
}

fn text_report(out: &VerifyOutput) -> String {
    let word = |s: Status| serde_json::to_value(s).unwrap().as_str().unwrap().to_string();
    let suite = serde_json::to_value(out.suite).unwrap();
    let mut s = format!("{} k={} {}\n", suite.as_str().unwrap(), out.k, word(out.status));
    for c in out.clauses.iter().flatten() {
        s += &format!(
            "  clause {} {}: {}{}\n",
            c.number,
            c.check.clause,
            if c.check.holds { "holds" } else { "FAILS" },
            if c.check.equality { " (equality)" } else { "" }
        );
    }
    for v in &out.graphs {
        s += &format!("  {} {} {}\n", v.index, v.graph6, word(v.status));
    }
    s
}

fn parse_hypotheses(raw: &[String]) -> Result<Vec<Hypothesis>> {
    if raw.is_empty() {
        return Ok(vec![
            Hypothesis::NoEdgeAdditions { i: 1 },
            Hypothesis::TightUngemmed { i: 0 },
            Hypothesis::TightUngemmed { i: 1 },
            Hypothesis::TightUngemmed { i: 2 },
        ]);
    }
    raw.iter()
        .map(|h| {
            let bad =
                || CliError::Usage(format!("bad hypothesis {h:?}; expected no-edge-additions:I or tight-ungemmed:I"));
            let (name, i) = h.split_once(':').ok_or_else(bad)?;
            let i: u32 = i.parse().map_err(|_| bad())?;
            match name {
                "no-edge-additions" => Ok(Hypothesis::NoEdgeAdditions { i: i as usize }),
                "tight-ungemmed" => Ok(Hypothesis::TightUngemmed { i }),
                _ => Err(bad()),
            }
        })
        .collect()
}

fn fold(statuses: impl IntoIterator<Item = Status>) -> Status {
    statuses.into_iter().max().unwrap_or(Status::Inapplicable)
}

fn ky(g: &Graph, params: &PotentialParams) -> Result<(Status, Value)> {
    let rep = check_density_theorems(g, params).map_err(|e| CliError::Usage(e.to_string()))?;
    let status = if !rep.critical {
        Status::Inapplicable
    } else if rep.failures().next().is_some() {
        Status::Fail
    } else if rep.k_ore.is_none() {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    let strict: Vec<&str> = rep
        .claims
        .iter()
        .filter(|c| c.status == ClaimStatus::Pass && c.lhs != c.rhs)
        .map(|c| c.name.as_str())
        .collect();
    let strict = json!(strict);
    Ok((status, json!({ "density": rep, "strict": strict })))
}

fn ore_bounds(g: &Graph, params: &PotentialParams, budget: Budget) -> Result<(Status, Value)> {
    let k = params.k;
    let rec =
        recognize_k_ore(g, k, budget.search_caps().recognition_budget).map_err(|e| CliError::Usage(e.to_string()))?;
    match rec {
        Recognition::KOre { trace } => {
            let rep = check_density_theorems(g, params).map_err(|e| CliError::Usage(e.to_string()))?;
            let claims: Vec<_> = rep
                .claims
                .into_iter()
                .filter(|c| c.name.starts_with("ore-") || c.name == "ky-equality-iff-ore")
                .collect();
            let status = fold(claims.iter().map(|c| match c.status {
                ClaimStatus::Pass => Status::Pass,
                ClaimStatus::Fail => Status::Fail,
                ClaimStatus::Inapplicable => Status::Inconclusive,
            }));
            Ok((status, json!({ "k_ore": true, "trace": trace, "claims": claims })))
        }
        Recognition::NotKOre => Ok((Status::Inapplicable, json!({ "k_ore": false }))),
        Recognition::BudgetExhausted { budget } => {
            Ok((Status::Inconclusive, json!({ "k_ore": null, "budget": budget })))
        }
    }
}

fn gems(g: &Graph, k: usize, budget: Budget) -> Result<(Status, Value)> {
    let gems = find_gems(g, k);
    let invalid: Vec<String> = gems.iter().filter_map(|gem| gem.validate(g, k).err().map(|e| e.to_string())).collect();
    let rec =
        recognize_k_ore(g, k, budget.search_caps().recognition_budget).map_err(|e| CliError::Usage(e.to_string()))?;
    let (status, unavoided, unmissed) = match rec.is_k_ore() {
        Some(true) => {
            let unavoided: Vec<usize> =
                (0..g.n()).filter(|&v| !gems.iter().any(|gem| !gem.vertices.contains(&v))).collect();
            let unmissed: Vec<Vec<usize>> = if g.n() == k {
                Vec::new()
            } else {
                cliques_of_size(g, k - 1)
                    .into_iter()
                    .filter(|d| !gems.iter().any(|gem| gem.vertices.iter().all(|&v| !d.contains(v))))
                    .map(|d| d.to_vec())
                    .collect()
            };
            let ok = invalid.is_empty() && unavoided.is_empty() && unmissed.is_empty();
            (if ok { Status::Pass } else { Status::Fail }, unavoided, unmissed)
        }
        Some(false) => (if invalid.is_empty() { Status::Inapplicable } else { Status::Fail }, Vec::new(), Vec::new()),
        None => (Status::Inconclusive, Vec::new(), Vec::new()),
    };
    Ok((
        status,
        json!({
            "k_ore": rec.is_k_ore(),
            "gems": gems,
            "invalid_gems": invalid,
            "vertices_in_every_gem": unavoided,
            "cliques_meeting_every_gem": unmissed,
        }),
    ))
}

/// Base sets examined when none is given: every proper subset with at least
/// two vertices for small graphs, else closed neighbourhoods and the
/// `K_{k-1}` cliques.
fn default_subsets(g: &Graph, k: usize) -> Vec<VertexSet> {
    let n = g.n();
    if n <= 10 {
        return (1u32..(1 << n) - 1)
            .map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect::<VertexSet>())
            .filter(|r| r.len() >= 2)
            .collect();
    }
    let mut out: Vec<VertexSet> = (0..n).map(|v| g.closed_neighbors(v)).filter(|r| r.len() < n).collect();
    out.extend(cliques_of_size(g, k - 1));
    out.sort_by_key(|r| r.to_vec());
    out.dedup();
    out
}

/// Per base set: collapsible exactly when every extension is spanning,
/// complete and has a one-vertex core; extensions all at most i-incomplete
/// force i-collapsibility; a collapsible set contains a one-edge addition.
fn collapse(g: &Graph, k: usize, subset: Option<&[usize]>, i: usize, caps: ExtensionCaps) -> Result<(Status, Value)> {
    if !is_critical(g, k) {
        return Ok((Status::Inapplicable, json!({ "critical": false })));
    }
    let explicit = subset.is_some();
    let sets = match subset {
        Some(s) => {
            if s.iter().any(|&v| v >= g.n()) || s.len() < 2 || s.len() >= g.n() {
                return Err(CliError::Usage(format!(
                    "--subset must be a proper subset of 0..{} with two or more vertices",
                    g.n()
                )));
            }
            vec![VertexSet::from_slice(s)]
        }
        None => default_subsets(g, k),
    };
    let pre = |e: critgraph::extension::ExtensionError| CliError::Usage(e.to_string());
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut undecided = 0usize;
    let mut collapsible_count = 0usize;
    for r in &sets {
        let rv = r.to_vec();
        let Some(outcomes) = all_extensions(g, r, k, caps).map_err(pre)? else {
            undecided += 1;
            continue;
        };
        let recs: Vec<_> = outcomes
            .into_iter()
            .filter_map(|o| match o {
                ExtensionOutcome::Extension(rec) => Some(rec),
                ExtensionOutcome::NoExtension => None,
            })
            .collect();
        for rec in &recs {
            if let Err(e) = rec.validate(g) {
                failures.push(format!("R={rv:?}: {e}"));
            }
        }
        let zero = is_i_collapsible(g, r, 0, k, caps).map_err(pre)?;
        let at_i = if i == 0 { zero.clone() } else { is_i_collapsible(g, r, i, k, caps).map_err(pre)? };
        if matches!(zero, Collapsibility::BudgetExhausted { .. })
            || matches!(at_i, Collapsibility::BudgetExhausted { .. })
        {
            undecided += 1;
            continue;
        }
        let collapsible = zero == Collapsibility::Collapsible;
        let nice = recs.iter().all(|rec| rec.spanning && rec.core.len() == 1 && rec.is_complete());
        if collapsible != nice {
            failures.push(format!("R={rv:?}: collapsible = {collapsible}, extensions say {nice}"));
        }
        let near = recs.iter().all(|rec| rec.spanning && rec.core.len() == 1 && rec.incompleteness <= i as i64);
        if near && at_i != Collapsibility::Collapsible {
            failures.push(format!("R={rv:?}: extensions at most {i}-incomplete but not {i}-collapsible"));
        }
        let mut addition = None;
        if collapsible {
            collapsible_count += 1;
            let inside: Vec<(usize, usize)> =
                g.non_edges_colex().into_iter().filter(|&(a, b)| r.contains(a) && r.contains(b)).collect();
            match find_i_edge_addition_among(g, 1, k, &inside, caps).map_err(pre)? {
                EdgeAdditionOutcome::Found(w) => addition = Some(w),
                EdgeAdditionOutcome::NotFound => {
                    failures.push(format!("R={rv:?}: collapsible without a one-edge addition"))
                }
                EdgeAdditionOutcome::BudgetExhausted { .. } => undecided += 1,
            }
        }
        if explicit {
            rows.push(json!({
                "subset": rv,
                "collapsible": collapsible,
                "i": i,
                "i_collapsible": at_i,
                "extensions": recs,
                "edge_addition": addition,
            }));
        }
    }
    let status = if !failures.is_empty() {
        Status::Fail
    } else if undecided > 0 {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok((
        status,
        json!({
            "critical": true,
            "subsets": sets.len(),
            "collapsible": collapsible_count,
            "undecided": undecided,
            "failures": failures,
            "details": rows,
        }),
    ))
}

fn lemmas(g: &Graph, params: &PotentialParams, hypotheses: &[Hypothesis], budget: Budget) -> Result<(Status, Value)> {
    let rep = check_structural_lemmas(g, params, hypotheses, budget.search_caps())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let status = fold(rep.checks.iter().map(|c| match c.status {
        LemmaStatus::Pass => Status::Pass,
        LemmaStatus::Fail => Status::Fail,
        LemmaStatus::Inconclusive => Status::Inconclusive,
        LemmaStatus::Skipped => Status::Inapplicable,
    }));
    Ok((status, serde_json::to_value(&rep).expect("lemma report serialises")))
}
