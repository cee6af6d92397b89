//! Loading graphs, path sets and name lists.

use std::collections::BTreeSet;
use std::path::Path;

use selmed::criteria::PseQuery;
use selmed::{Admg, PathSetPi, VertexSet};
use serde::Deserialize;

use crate::error::CliError;

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
}

pub fn load_graph(path: &Path) -> Result<Admg, CliError> {
    Admg::from_json(&read_to_string(path)?).map_err(|e| CliError::new("graph", format!("{}: {e}", path.display())))
}

/// Splits comma-separated flag values, dropping empty items.
pub fn names(values: &[String]) -> Vec<String> {
    values.iter().flat_map(|v| v.split(',')).map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

pub fn vertex_set(g: &Admg, values: &[String]) -> Result<VertexSet, CliError> {
    Ok(g.vertex_set(names(values))?)
}

/// Path set file: either explicit paths or whole first-edge cells.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiFile {
    #[serde(default)]
    paths: Option<Vec<Vec<String>>>,
    #[serde(default)]
    first_edges: Option<Vec<[String; 2]>>,
}

impl PiFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::new("json", format!("{}: {e}", path.display())))
    }

    pub fn query(&self, g: &Admg, exposure: VertexSet, outcome: VertexSet) -> Result<PseQuery, CliError> {
        let pi = match (&self.paths, &self.first_edges) {
            (Some(paths), None) => PathSetPi::from_names(g, exposure, outcome, paths)?,
            (None, Some(edges)) => {
                let edges = edges
                    .iter()
                    .map(|[a, b]| Ok((g.vertex(a)?, g.vertex(b)?)))
                    .collect::<Result<BTreeSet<_>, selmed::GraphError>>()?;
                PathSetPi::from_first_edges(g, exposure, outcome, &edges)?
            }
            _ => return Err(CliError::usage("a path set file needs exactly one of `paths` or `first_edges`")),
        };
        Ok(PseQuery::new(pi))
    }
}

pub fn load_pi(g: &Admg, path: &Path, exposure: VertexSet, outcome: VertexSet) -> Result<PseQuery, CliError> {
    PiFile::load(path)?.query(g, exposure, outcome)
}
