use std::path::PathBuf;

use clap::{Args, ValueEnum};
use selmed::criteria::{theorem2_check, AdmissiblePair};
use selmed::estimate::{
    estimate_mediation, estimate_pse, ColumnKind, Dataset, EffectEstimate, EstimateOptions, Family, GlmOptions,
    Interactions, Mode, ModelSpec, PseSpec, Scale,
};
use serde::Serialize;

use crate::error::CliError;
use crate::inputs::{load_graph, load_pi, names, vertex_set, write_file};
use crate::Outcome;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Naive,
    Adjusted,
    Both,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Needed for path-specific effects; optional otherwise.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "S")]
    pub selection_col: String,
    #[arg(long)]
    pub exposure: String,
    #[arg(long = "mediator", alias = "mediators", default_value = "")]
    pub mediators: Vec<String>,
    #[arg(long)]
    pub outcome: String,
    #[arg(long, default_value = "")]
    pub z: Vec<String>,
    #[arg(long, default_value = "")]
    pub zt: Vec<String>,
    /// Comma-separated: diff, rr.
    #[arg(long, default_value = "diff")]
    pub scale: Vec<String>,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub boot: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Monte Carlo draws for a continuous mediator with a nonlinear outcome.
    #[arg(long, default_value_t = 200)]
    pub mc_draws: usize,
    /// Path set file; switches to the path-specific estimator.
    #[arg(long)]
    pub pi: Option<PathBuf>,
    /// Run the path-specific estimator even when the identification check fails.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value = "pairwise")]
    pub interactions: Interactions,
    /// logistic or linear; inferred from the column type when absent.
    #[arg(long)]
    pub outcome_family: Option<Family>,
    #[arg(long)]
    pub mediator_family: Option<Family>,
    /// Also apply selection weights inside the nuisance fits.
    #[arg(long)]
    pub weight_nuisance: bool,
    /// Add a 1e-6 ridge penalty to every fit.
    #[arg(long)]
    pub ridge: bool,
    /// Columns holding discrete levels other than 0/1.
    #[arg(long, default_value = "")]
    pub categorical: Vec<String>,
    /// 0/1 column marking the analysed subset of the selected rows.
    #[arg(long)]
    pub subsample_col: Option<String>,
    /// Column of nonnegative row frequencies.
    #[arg(long)]
    pub frequency_col: Option<String>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

fn family(explicit: Option<Family>, data: &Dataset, column: &str) -> Result<Family, CliError> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    Ok(match data.column(column)?.kind {
        ColumnKind::Continuous => Family::Linear,
        ColumnKind::Binary | ColumnKind::Categorical => Family::Logistic,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    estimand: String,
    scale: &'a str,
    mode: &'a str,
    point: f64,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    bootstrap_reps: usize,
    seed: u64,
}

pub fn to_csv(estimates: &[EffectEstimate]) -> Result<String, CliError> {
    let mut w = csv_writer();
    for e in estimates {
        w.serialize(CsvRow {
            estimand: e.estimand.to_string(),
            scale: match e.scale {
                Scale::Difference => "diff",
                Scale::RiskRatio => "rr",
            },
            mode: if e.adjusted { "adjusted" } else { "naive" },
            point: e.point,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            bootstrap_reps: e.bootstrap_reps,
            seed: e.seed,
        })
        .map_err(|err| CliError::new("csv", err.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|err| CliError::new("csv", err.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

pub fn run(args: &EstimateArgs) -> Result<Outcome, CliError> {
    let mut data = Dataset::from_csv_path(&args.data, &args.selection_col, &names(&args.categorical))?;
    if let Some(col) = &args.subsample_col {
        data = data.with_subsample(col)?;
    }
    if let Some(col) = &args.frequency_col {
        data = data.with_frequency_column(col)?;
    }
    let mediators = names(&args.mediators);
    let z = names(&args.z);
    let zt = names(&args.zt);
    for col in mediators.iter().chain(&z).chain(&zt).chain([&args.exposure, &args.outcome]) {
        data.column_index(col)?;
    }

    let scales = names(&args.scale)
        .iter()
        .map(|s| s.parse::<Scale>().map_err(CliError::usage))
        .collect::<Result<Vec<_>, _>>()?;
    let modes = match args.mode {
        ModeArg::Naive => vec![Mode::Naive],
        ModeArg::Adjusted => vec![Mode::Adjusted],
        ModeArg::Both => vec![Mode::Naive, Mode::Adjusted],
    };
    let glm = GlmOptions { ridge: if args.ridge { 1e-6 } else { 0.0 }, ..GlmOptions::default() };
    let opts = EstimateOptions {
        scales,
        modes,
        boot: args.boot,
        seed: args.seed,
        level: args.level,
        mc_draws: args.mc_draws,
        weight_nuisance: args.weight_nuisance,
        glm,
        ..EstimateOptions::default()
    };

    let estimates = match &args.pi {
        Some(pi_path) => {
            let graph = args.graph.as_ref().ok_or_else(|| CliError::usage("--pi needs --graph"))?;
            let g = load_graph(graph)?;
            let x = vertex_set(&g, std::slice::from_ref(&args.exposure))?;
            let y = vertex_set(&g, std::slice::from_ref(&args.outcome))?;
            let q = load_pi(&g, pi_path, x, y)?;
            let pair = AdmissiblePair::new(vertex_set(&g, &args.z)?, vertex_set(&g, &args.zt)?)?;
            let spec = PseSpec { interactions: args.interactions, force: args.force };
            estimate_pse(&data, &g, &q, &pair, &spec, &opts)?
        }
        None => {
            if mediators.len() != 1 {
                return Err(CliError::usage("the mediation estimator needs exactly one --mediator (use --pi for several)"));
            }
            if let Some(graph) = &args.graph {
                let g = load_graph(graph)?;
                let pair = AdmissiblePair::new(vertex_set(&g, &args.z)?, vertex_set(&g, &args.zt)?)?;
                let report = theorem2_check(&g, g.vertex(&args.exposure)?, g.vertex(&mediators[0])?, g.vertex(&args.outcome)?, &pair)?;
                for c in report.failed() {
                    eprintln!("warning: {} fails{}", c.label, c.witness.as_ref().map(|w| format!(" ({})", w.rendered())).unwrap_or_default());
                }
            }
            let spec = ModelSpec {
                exposure: args.exposure.clone(),
                mediators: mediators.clone(),
                outcome: args.outcome.clone(),
                z,
                zt,
                interactions: args.interactions,
                outcome_family: family(args.outcome_family, &data, &args.outcome)?,
                mediator_family: family(args.mediator_family, &data, &mediators[0])?,
            };
            estimate_mediation(&data, &spec, &opts)?
        }
    };

    let json = serde_json::to_string_pretty(&estimates)?;
    match &args.out_json {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.out_csv {
        write_file(path, &to_csv(&estimates)?)?;
    }
    Ok(Outcome::Ok)
}
