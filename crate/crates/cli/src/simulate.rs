use std::path::PathBuf;

use clap::Args;
use selmed::oracle::{sweep, SweepConfig};

use crate::error::CliError;
use crate::inputs::write_file;
use crate::Outcome;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated selection strengths; defaults to 0, 0.25, ..., 2.
    #[arg(long, value_delimiter = ',')]
    pub beta_grid: Vec<f64>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n0: usize,
    #[arg(long, default_value_t = 1_000)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let mut cfg = SweepConfig { reps: args.reps, n0: args.n0, n: args.n, seed: args.seed, ..SweepConfig::default() };
    if !args.beta_grid.is_empty() {
        cfg.grid = args.beta_grid.clone();
    }
    let result = sweep(&cfg)?;
    for r in result.rows.iter().filter(|r| r.failures > 0) {
        eprintln!("warning: beta_s={} {} {}: {} failed replicates", r.beta_s, r.estimand, r.mode, r.failures);
    }
    let csv = result.to_csv();
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(Outcome::Ok)
}
