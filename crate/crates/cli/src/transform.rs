use std::path::PathBuf;

use clap::{Args, ValueEnum};
use selmed::surgery::{contract_extended, extend_graph, proper_backdoor_graph, remove_incoming, remove_outgoing};

use crate::error::CliError;
use crate::inputs::{load_graph, vertex_set, write_file};
use crate::Outcome;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Operation {
    /// Drop directed edges into `--vertices`.
    RemoveIncoming,
    /// Drop directed edges out of `--vertices`.
    RemoveOutgoing,
    /// Drop the first edge of every proper causal path from exposure to outcome.
    ProperBackdoor,
    /// Intercept first edges with extended exposure nodes.
    Extend,
    /// Undo `extend`.
    Contract,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub op: Operation,
    #[arg(long, default_value = "")]
    pub exposure: Vec<String>,
    #[arg(long, default_value = "")]
    pub outcome: Vec<String>,
    #[arg(long, default_value = "")]
    pub vertices: Vec<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &TransformArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&args.graph)?;
    let result = match args.op {
        Operation::RemoveIncoming => remove_incoming(&g, &vertex_set(&g, &args.vertices)?)?,
        Operation::RemoveOutgoing => remove_outgoing(&g, &vertex_set(&g, &args.vertices)?)?,
        Operation::ProperBackdoor => proper_backdoor_graph(&g, &vertex_set(&g, &args.exposure)?, &vertex_set(&g, &args.outcome)?)?,
        Operation::Extend => extend_graph(&g, &vertex_set(&g, &args.exposure)?, &vertex_set(&g, &args.outcome)?)?.into_graph(),
        Operation::Contract => contract_extended(&g),
    };
    let text = result.to_json();
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => println!("{text}"),
    }
    Ok(Outcome::Ok)
}
