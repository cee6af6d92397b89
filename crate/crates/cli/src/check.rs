use std::path::PathBuf;

use clap::Args;
use selmed::criteria::{find_admissible_pairs, gac_admissible, theorem2_check, theorem3_check, AdmissiblePair, CriterionReport};
use selmed::separation::{m_connecting_path, SeparationQuery};
use serde_json::json;

use crate::error::CliError;
use crate::inputs::{load_graph, load_pi, names, vertex_set};
use crate::Outcome;

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated exposure vertices.
    #[arg(long, required_unless_present = "msep")]
    pub exposure: Vec<String>,
    #[arg(long, required_unless_present = "msep")]
    pub outcome: Vec<String>,
    /// Single mediator: checks the selected mediation formula conditions.
    #[arg(long, conflicts_with = "pi")]
    pub mediator: Option<String>,
    /// Path set file; checks the path-specific conditions.
    #[arg(long)]
    pub pi: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub z: Vec<String>,
    #[arg(long, default_value = "")]
    pub zt: Vec<String>,
    /// List every admissible pair drawn from the candidates instead.
    #[arg(long, conflicts_with_all = ["mediator", "pi"])]
    pub search: bool,
    #[arg(long, default_value = "")]
    pub candidates: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub max_size: usize,
    /// Separation query `A,B|Z`; join several vertices on one side with `+`.
    #[arg(long, conflicts_with_all = ["mediator", "pi", "search"])]
    pub msep: Option<String>,
}

type Names = Vec<String>;

/// Parses `A,B|Z1,Z2` into the three vertex name lists.
fn parse_msep(text: &str) -> Result<(Names, Names, Names), CliError> {
    let (sides, z) = text.split_once('|').unwrap_or((text, ""));
    let sides: Vec<&str> = sides.split(',').collect();
    let [a, b] = sides[..] else {
        return Err(CliError::usage(format!("--msep expects `A,B|Z`, got `{text}`")));
    };
    let group = |s: &str| s.split('+').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect::<Vec<_>>();
    Ok((group(a), group(b), names(&[z.to_string()])))
}

fn separation(g: &selmed::Admg, text: &str) -> Result<Outcome, CliError> {
    let (a, b, z) = parse_msep(text)?;
    let q = SeparationQuery::from_names(g, &a, &b, &z)?;
    let path = m_connecting_path(g, &q)?;
    match &path {
        None => eprintln!("{} and {} are m-separated given {{{}}}", a.join(","), b.join(","), z.join(",")),
        Some(p) => eprintln!("m-connected: {}", p.render(g)),
    }
    let out = json!({
        "criterion": "m-separation",
        "verdict": path.is_none(),
        "witness": path.as_ref().map(|p| p.render(g)),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if path.is_none() { Outcome::Ok } else { Outcome::NotIdentified })
}

fn describe(report: &CriterionReport) {
    for c in &report.conditions {
        match &c.witness {
            None if c.passed => eprintln!("{}: pass", c.label),
            None => eprintln!("{}: FAIL", c.label),
            Some(w) => eprintln!("{}: {} ({})", c.label, if c.passed { "pass" } else { "FAIL" }, w.rendered()),
        }
    }
    eprintln!("verdict: {}", if report.verdict { "identified" } else { "not identified" });
}

pub fn run(args: &CheckArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&args.graph)?;
    if let Some(text) = &args.msep {
        return separation(&g, text);
    }
    let x = vertex_set(&g, &args.exposure)?;
    let y = vertex_set(&g, &args.outcome)?;

    if args.search {
        let candidates = vertex_set(&g, &args.candidates)?;
        let found = find_admissible_pairs(&g, &x, &y, &candidates, args.max_size)?;
        let pairs: Vec<_> = found
            .iter()
            .map(|p| {
                let (z, zt) = p.describe(&g);
                json!({ "z": z, "zt": zt })
            })
            .collect();
        for p in &found {
            let (z, zt) = p.describe(&g);
            eprintln!("Z={{{}}} ZT={{{}}}", z.join(","), zt.join(","));
        }
        println!("{}", serde_json::to_string_pretty(&json!({ "criterion": "search", "pairs": pairs }))?);
        return Ok(if found.is_empty() { Outcome::NotIdentified } else { Outcome::Ok });
    }

    let pair = AdmissiblePair::new(vertex_set(&g, &args.z)?, vertex_set(&g, &args.zt)?)?;
    let (criterion, report) = match (&args.mediator, &args.pi) {
        (Some(m), _) => {
            let single = |set: &selmed::VertexSet, role: &str| {
                if set.len() == 1 {
                    Ok(*set.first().expect("one element"))
                } else {
                    Err(CliError::usage(format!("--mediator needs a single {role}")))
                }
            };
            let report = theorem2_check(&g, single(&x, "exposure")?, g.vertex(m)?, single(&y, "outcome")?, &pair)?;
            ("mediation", report)
        }
        (None, Some(path)) => {
            let q = load_pi(&g, path, x.clone(), y.clone())?;
            ("path-specific", theorem3_check(&g, &q, &pair)?)
        }
        (None, None) => ("adjustment", gac_admissible(&g, &x, &y, &pair)?),
    };
    describe(&report);
    let out = json!({ "criterion": criterion, "verdict": report.verdict, "conditions": report.conditions });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if report.verdict { Outcome::Ok } else { Outcome::NotIdentified })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msep_syntax() {
        let (a, b, z) = parse_msep("X+W,Y|C,D").unwrap();
        assert_eq!((a, b, z), (vec!["X".into(), "W".into()], vec!["Y".into()], vec!["C".into(), "D".into()]));
        assert!(parse_msep("X,Y").unwrap().2.is_empty());
        assert!(parse_msep("X|C").is_err());
    }
}
