//! `critgraph`: generate k-Ore graphs, run the verification suites, the
//! structure census and the discharging ledger.

mod input;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use critgraph::discharge::{
    component_satisfaction, run_discharge, Annotations, ChargeLedger, DischargeError, DischargeParams, GraphHooks,
    StructureHooks,
};
use critgraph::ore::{generate_k_ore, OreTrace};
use critgraph::potential::{PotentialParams, SCHEMA_VERSION};
use critgraph::rational::{self, Rational};
use critgraph::structure::structure_report;
use critgraph::Graph;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use input::Budget;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Input(_) => 65,
            CliError::Io(_) => 74,
            CliError::Invariant(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "critgraph", version, about = "Exact tools for k-critical graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random k-Ore graphs as graph6 lines, with their composition traces.
    Gen(GenArgs),
    /// Run one verification suite over the input graphs.
    Verify(VerifyArgs),
    /// Run the six-stage discharging and write the ledger.
    Discharge(DischargeArgs),
    /// Gems, clusters, gadgets and low-degree components of each graph.
    Analyze(AnalyzeArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args)]
pub struct Common {
    /// graph6 file, one graph per line; stdin when absent or `-`
    pub input: Option<PathBuf>,
    /// Inline graph6 (repeatable); used instead of the input file
    #[arg(long = "graph", short = 'g')]
    pub graphs: Vec<String>,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Exact epsilon, e.g. 1/105; the other constants are set tight from it
    #[arg(long, value_parser = parse_rational)]
    pub epsilon: Option<Rational>,
    /// JSON file with k, epsilon, delta, p, q, big_delta, gamma
    #[arg(long, conflicts_with = "epsilon")]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads; graphs are spread across them
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Ore compositions per graph; |V| = k + ops(k-1)
    #[arg(long)]
    ops: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Graph i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Trace sidecar; defaults to <output>.traces.json when --output is set
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: verify::Suite,
    /// Base set R for the collapse suite, comma separated
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,
    /// Collapsibility level checked by the collapse suite
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    /// Claimed hypothesis for the lemmas suite (repeatable), e.g.
    /// no-edge-additions:1 or tight-ungemmed:2
    #[arg(long = "hypothesis")]
    pub hypotheses: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
struct DischargeArgs {
    /// JSON with optional degrees, clusters and downward pairs
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Compare the ledger byte for byte with this file
    #[arg(long)]
    golden: Option<PathBuf>,
    /// Scan stage-2 rounds in descending vertex order
    #[arg(long)]
    descending: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let run = match cli.command {
        Command::Gen(a) => cmd_generate(a),
        Command::Verify(a) => verify::cmd_verify(a),
        Command::Discharge(a) => cmd_discharge(a),
        Command::Analyze(a) => cmd_analyze(a),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("critgraph: {e}");
            ExitCode::from(e.code())
        }
    }
}

pub fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialise") + "\n"
}

/// Apply `f` to every graph on a pool of `jobs` threads, keeping input order.
pub fn map_graphs<T, F>(jobs: usize, graphs: &[Graph], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Graph) -> Result<T> + Sync,
{
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::Io(e.to_string()))?;
    pool.install(|| graphs.par_iter().enumerate().map(|(i, g)| f(i, g)).collect())
}

// ---------------------------------------------------------------- gen

#[derive(Serialize)]
struct TraceFile {
    schema_version: u32,
    k: usize,
    ops: usize,
    graphs: Vec<TraceEntry>,
}

#[derive(Serialize)]
struct TraceEntry {
    index: usize,
    seed: u64,
    graph6: String,
    n: usize,
    trace: OreTrace,
}

fn cmd_generate(a: GenArgs) -> Result<u8> {
    let mut lines = String::new();
    let mut graphs = Vec::with_capacity(a.count);
    for index in 0..a.count {
        let seed = a.seed.wrapping_add(index as u64);
        let og = generate_k_ore(a.k, a.ops, seed).map_err(|e| CliError::Usage(e.to_string()))?;
        let graph6 = og.graph.to_graph6();
        lines.push_str(&graph6);
        lines.push('\n');
        graphs.push(TraceEntry { index, seed, graph6, n: og.graph.n(), trace: og.trace });
    }
    write_out(a.output.as_deref(), &lines)?;
    let sidecar = a.traces.or_else(|| {
        a.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".traces.json");
            PathBuf::from(s)
        })
    });
    if let Some(p) = sidecar {
        let file = TraceFile { schema_version: SCHEMA_VERSION, k: a.k, ops: a.ops, graphs };
        write_out(Some(&p), &to_json(&file))?;
    }
    Ok(0)
}

// ---------------------------------------------------------------- discharge

fn cmd_discharge(a: DischargeArgs) -> Result<u8> {
    let c = &a.common;
    if c.k != 6 {
        return Err(CliError::Usage(format!("discharging needs k = 6, got {}", c.k)));
    }
    let epsilon = match (&c.params, &c.epsilon) {
        (Some(_), _) => input::params(c)?.epsilon,
        (None, Some(e)) => {
            input::params(c)?;
            e.clone()
        }
        (None, None) => PotentialParams::k6().epsilon,
    };
    let annotations: Option<Annotations> = match &a.annotations {
        Some(p) => Some(
            serde_json::from_str(&input::read_file(p)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let graphs = input::graphs(c)?;
    if a.golden.is_some() && graphs.len() != 1 {
        return Err(CliError::Usage("--golden needs exactly one input graph".into()));
    }
    let params = DischargeParams { stage2_descending: a.descending, ..DischargeParams::with_epsilon(epsilon) };
    let caps = Budget::from_env()?.search_caps();
    let ledgers = map_graphs(c.jobs, &graphs, |i, g| {
        let from_graph;
        let hooks: &dyn StructureHooks = match &annotations {
            Some(ann) => {
                ann.check(g).map_err(|e| CliError::Input(format!("graph {i}: {e}")))?;
                ann
            }
            None => {
                from_graph = GraphHooks::new(g, caps);
                &from_graph
            }
        };
        let ledger = run_discharge(g, &params, hooks).map_err(|e| match e {
            DischargeError::Invariant(m) => CliError::Invariant(format!("graph {i}: {m}")),
            other => CliError::Input(format!("graph {i}: {other}")),
        })?;
        if !ledger.is_conserved() {
            return Err(CliError::Invariant(format!("graph {i}: total charge not conserved")));
        }
        ledger.validate(g).map_err(|e| CliError::Invariant(format!("graph {i}: {e}")))?;
        Ok(ledger)
    })?;

    let text = match c.format {
        Format::Json if ledgers.len() == 1 => to_json(&ledgers[0]),
        Format::Json => to_json(&ledgers),
        Format::Text => discharge_text(&graphs, &ledgers)?,
    };
    if let Some(golden) = &a.golden {
        if c.output.is_some() {
            write_out(c.output.as_deref(), &text)?;
        }
        let want = input::read_file(golden)?;
        if want != text {
            let line = want
                .lines()
                .zip(text.lines())
                .position(|(x, y)| x != y)
                .unwrap_or_else(|| want.lines().count().min(text.lines().count()));
            eprintln!("critgraph: ledger differs from {} at line {}", golden.display(), line + 1);
            return Ok(1);
        }
        return Ok(0);
    }
    write_out(c.output.as_deref(), &text)?;
    Ok(0)
}

fn discharge_text(graphs: &[Graph], ledgers: &[ChargeLedger]) -> Result<String> {
    let mut s = String::new();
    for (g, l) in graphs.iter().zip(ledgers) {
        let sat = component_satisfaction(l, g).map_err(|e| CliError::Invariant(e.to_string()))?;
        let last = &l.stages[6];
        let negative = last.charges.iter().filter(|c| c < &&rational::zero()).count();
        s += &format!(
            "{} total={} transfers={} reserved={:?} negative_final={} components_satisfied={}{}\n",
            g.to_graph6(),
            rational::to_string(&last.total),
            l.transfers.len(),
            l.reserved,
            negative,
            sat.all_satisfied,
            if l.partial { " partial" } else { "" },
        );
    }
    Ok(s)
}

// ---------------------------------------------------------------- analyze

#[derive(Serialize)]
struct AnalyzeOutput<T> {
    schema_version: u32,
    command: &'static str,
    k: usize,
    graphs: Vec<T>,
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<u8> {
    let c = &a.common;
    let params = input::params(c)?;
    let graphs = input::graphs(c)?;
    let caps = Budget::from_env()?.search_caps();
    let reports = map_graphs(c.jobs, &graphs, |i, g| {
        structure_report(g, &params, caps).map_err(|e| CliError::Input(format!("graph {i}: {e}")))
    })?;
    let text = match c.format {
        Format::Json => {
            to_json(&AnalyzeOutput { schema_version: SCHEMA_VERSION, command: "analyze", k: c.k, graphs: reports })
        }
        Format::Text => reports
            .iter()
            .map(|r| {
                format!(
                    "{} gems={} clusters={} proto_gadgets={}{} kites={}{} low_degree_components={} potential={}\n",
                    r.graph6,
                    r.gems.len(),
                    r.clusters.len(),
                    r.proto_gadgets.gadgets.len(),
                    if r.proto_gadgets.incomplete { "+" } else { "" },
                    r.kites.gadgets.len(),
                    if r.kites.incomplete { "+" } else { "" },
                    r.low_degree_components.len(),
                    rational::to_string(&r.potential),
                )
            })
            .collect(),
    };
    write_out(c.output.as_deref(), &text)?;
    Ok(0)
}
