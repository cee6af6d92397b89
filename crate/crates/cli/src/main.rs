//! `selmed`: identification checks, graph surgery, estimation and
//! simulation for mediation under selection bias.
//!
//! Exit codes: 0 on success, 2 when the requested effect is not identified
//! (or the oracle disagrees), 1 on any operational error.

mod check;
mod error;
mod estimate;
mod inputs;
mod oracle;
mod simulate;
mod transform;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    NotIdentified,
}

#[derive(Debug, Parser)]
#[command(name = "selmed", version, about = "Mediation analysis under selection bias")]
struct Cli {
    /// Print errors as JSON on stdout.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Worker threads for bootstrap and simulation.
    #[arg(long, global = true, env = "SELMED_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an identification criterion on a graph.
    Check(check::CheckArgs),
    /// Apply a graph surgery operation.
    Transform(transform::TransformArgs),
    /// Estimate effects from a CSV file.
    Estimate(Box<estimate::EstimateArgs>),
    /// Run the naive versus adjusted simulation sweep.
    Simulate(simulate::SimulateArgs),
    /// Compare a formula with exact counterfactuals on random models.
    Oracle(oracle::OracleArgs),
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new("threads", e.to_string()))?;
    }
    match &cli.command {
        Command::Check(a) => check::run(a),
        Command::Transform(a) => transform::run(a),
        Command::Estimate(a) => estimate::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Oracle(a) => oracle::run(a),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on bad arguments, which would read as "not identified".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NotIdentified) => ExitCode::from(2),
        Err(e) => {
            if cli.json_errors {
                println!("{}", json!({ "error": e }));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::FAILURE
        }
    }
}
