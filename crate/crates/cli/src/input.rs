//! Graph input, parameter overrides and the search budget.

use std::fs;
use std::io::Read;
use std::path::Path;

use critgraph::extension::ExtensionCaps;
use critgraph::potential::PotentialParams;
use critgraph::structure::SearchCaps;
use critgraph::Graph;

use crate::{CliError, Common, Result};

pub fn read_file(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

/// Inline `--graph` values if any, else one graph6 per non-blank line of the
/// input file or stdin.
pub fn graphs(c: &Common) -> Result<Vec<Graph>> {
    if !c.graphs.is_empty() {
        return c
            .graphs
            .iter()
            .map(|s| Graph::from_graph6(s.trim()).map_err(|e| CliError::Input(format!("{s:?}: {e}"))))
            .collect();
    }
    let text = match c.input.as_deref() {
        Some(p) if p != Path::new("-") => read_file(p)?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            s
        }
    };
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(Graph::from_graph6(line).map_err(|e| CliError::Input(format!("line {}: {e}", no + 1)))?);
    }
    if out.is_empty() {
        return Err(CliError::Input("no graphs in input".into()));
    }
    Ok(out)
}

/// The potential constants: a `--params` file, tight constants from
/// `--epsilon`, or the k = 6 defaults. Always validated.
pub fn params(c: &Common) -> Result<PotentialParams> {
    let p = if let Some(path) = &c.params {
        let p: PotentialParams =
            serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if p.k != c.k {
            return Err(CliError::Usage(format!("parameter file is for k = {}, run is for k = {}", p.k, c.k)));
        }
        p
    } else if let Some(eps) = &c.epsilon {
        PotentialParams::tight(c.k, eps.clone())
            .map_err(|e| CliError::Usage(format!("epsilon override rejected: {e}")))?
    } else if c.k == 6 {
        PotentialParams::k6()
    } else {
        return Err(CliError::Usage(format!("no default constants for k = {}; pass --epsilon or --params", c.k)));
    };
    p.validate().map_err(|e| CliError::Usage(format!("parameters rejected: {e}")))?;
    Ok(p)
}

/// `CRITGRAPH_BUDGET`: a positive integer multiplying every search cap.
#[derive(Debug, Clone, Copy)]
pub struct Budget(pub u64);

impl Budget {
    pub fn from_env() -> Result<Budget> {
        match std::env::var("CRITGRAPH_BUDGET") {
            Err(_) => Ok(Budget(1)),
            Ok(v) => match v.trim().parse::<u64>() {
                Ok(f) if f > 0 => Ok(Budget(f)),
                _ => Err(CliError::Usage(format!("CRITGRAPH_BUDGET must be a positive integer, got {v:?}"))),
            },
        }
    }

    pub fn search_caps(self) -> SearchCaps {
        SearchCaps::default().scaled(self.0)
    }

    pub fn extension_caps(self) -> ExtensionCaps {
        ExtensionCaps::default().scaled(self.0)
    }
}
