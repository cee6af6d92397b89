//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` cannot be met as stated; they still
//! print FAIL with the reason, and the run only exits non-zero when some
//! other criterion fails or a known failure unexpectedly passes.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selmed::criteria::{
    edge_consistent, gac_admissible, gac_extended_equivalence, lemma2_conclusions, recanting_districts, theorem2_check,
    theorem3_check, AdmissiblePair, LemmaPremises, PseQuery,
};
use selmed::estimate::{estimate_mediation, EffectEstimate, EstimateOptions, Estimand, Family, Interactions, ModelSpec, Scale};
use selmed::oracle::sweep::sweep_model;
use selmed::oracle::{
    evaluate, pse_assignment, random_adjustment_instance, random_admg, random_separation_query, run_dgp, sweep,
    Assignment, ContinuousDgp, DiscreteScm, Formula, FormulaArgs, RandomGraphConfig, SweepConfig, TRUE_NDE, TRUE_NIE,
};
use selmed::separation::{m_separated, open_paths_oracle};
use selmed::{Admg, PathSetPi};

const NIE_TOLERANCE: f64 = 0.15;
const NDE_TOLERANCE: f64 = 0.10;
const NAIVE_NDE_FLOOR: f64 = 0.70;
const ADJUSTED_NDE_BAND: (f64, f64) = (0.40, 0.60);
const SIMULATION_REPS: usize = 200;
const SIMULATION_BUDGET_SECS: f64 = 300.0;
const ORACLE_TOLERANCE: f64 = 1e-9;
const ORACLE_SCMS: usize = 100;
const THEOREM1_INSTANCES: usize = 1000;
const LEMMA_GRAPHS: usize = 500;
const SEPARATION_GRAPHS: usize = 1000;
const SEPARATION_QUERIES: usize = 50;
const DECOMPOSITION_TOLERANCE: f64 = 1e-12;

/// Criteria that cannot pass as written, with the reason.
const KNOWN_FAILURES: &[(u32, &str)] = &[
    (
        4,
        "on the confounded two-mediator graph the mediator condition for M2 fails for every model (open backdoor M2 <- M1 -> Y), so no model passes the check",
    ),
    (
        6,
        "under the two stated premises alone, items (g) and (h) can fail when S descends from Y (M -> Y <- X^e_y is opened by S); with all adjustment conditions added there are no counterexamples",
    ),
];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn criterion_1_and_2() -> (Outcome, Outcome) {
    let start = Instant::now();
    let cfg = SweepConfig { grid: vec![0.0, 1.0, 2.0], reps: SIMULATION_REPS, n0: 10_000, n: 1_000, seed: 7 };
    let result = sweep(&cfg).expect("sweep runs");
    let secs = start.elapsed().as_secs_f64();
    let mean = |beta: f64, k: Estimand, m: selmed::estimate::Mode| result.get(beta, k, m).expect("cell").mean;
    use selmed::estimate::Mode::{Adjusted, Naive};

    let failures: usize = result.rows.iter().map(|r| r.failures).max().unwrap_or(0);
    let at0: Vec<f64> = [Naive, Adjusted].iter().flat_map(|&m| [mean(0.0, Estimand::NIE, m), mean(0.0, Estimand::NDE, m)]).collect();
    let c1 = (at0[0] - TRUE_NIE).abs() <= NIE_TOLERANCE
        && (at0[2] - TRUE_NIE).abs() <= NIE_TOLERANCE
        && (at0[1] - TRUE_NDE).abs() <= NDE_TOLERANCE
        && (at0[3] - TRUE_NDE).abs() <= NDE_TOLERANCE
        && secs <= SIMULATION_BUDGET_SECS;
    let o1 = outcome(
        c1,
        format!(
            "beta_s=0 reps={SIMULATION_REPS}: NIE naive {:.3} adjusted {:.3}, NDE naive {:.3} adjusted {:.3}; {secs:.1}s for 3 grid points; max failures per cell {failures}",
            at0[0], at0[2], at0[1], at0[3]
        ),
    );

    let naive2 = mean(2.0, Estimand::NDE, Naive);
    let adjusted2 = mean(2.0, Estimand::NDE, Adjusted);
    let bias: Vec<f64> = [0.0, 1.0, 2.0].iter().map(|&b| mean(b, Estimand::NDE, Naive) - TRUE_NDE).collect();
    let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| bias[j] < bias[i]).count();
    let nie_worst = [0.0, 1.0, 2.0]
        .iter()
        .flat_map(|&b| [Naive, Adjusted].map(|m| (mean(b, Estimand::NIE, m) - TRUE_NIE).abs()))
        .fold(0.0, f64::max);
    let c2 = naive2 >= NAIVE_NDE_FLOOR
        && (ADJUSTED_NDE_BAND.0..=ADJUSTED_NDE_BAND.1).contains(&adjusted2)
        && inversions <= 1
        && nie_worst <= NIE_TOLERANCE;
    let o2 = outcome(
        c2,
        format!(
            "beta_s=2 NDE naive {naive2:.3} adjusted {adjusted2:.3}; naive bias at 0,1,2 = {:.3},{:.3},{:.3} ({inversions} inversions); worst NIE error {nie_worst:.3}",
            bias[0], bias[1], bias[2]
        ),
    );
    (o1, o2)
}

fn criterion_3() -> Outcome {
    let g = fig1b();
    let (x, m, y) = (g.vertex("X").unwrap(), g.vertex("M").unwrap(), g.vertex("Y").unwrap());
    let args = FormulaArgs { exposure: x, outcome: y, mediator: Some(m), pair: c_pair(&g) };
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let (mut passing, mut worst) = (0, 0.0f64);
    while passing < ORACLE_SCMS {
        let scm = DiscreteScm::random(&g, &mut rng).unwrap();
        if !theorem2_check(&g, x, m, y, &args.pair).unwrap().verdict {
            continue;
        }
        let joint = scm.joint().unwrap();
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let formula = evaluate(&g, &joint, &Formula::Eq6 { x: a, x_prime: b }, &args).unwrap();
            let assignment: Assignment = [((x, y), a), ((x, m), b)].into();
            worst = worst.max((formula - scm.counterfactual_mean(&assignment, y).unwrap()).abs());
        }
        passing += 1;
    }
    outcome(worst <= ORACLE_TOLERANCE, format!("{passing} models, 4 contrasts each, max |selected mediation formula - oracle| = {worst:.2e}"))
}

/// Worst discrepancy between the path-specific formula and the edge
/// assignment over `count` random models on `g`, and how many passed the check.
fn pse_discrepancy(g: &Admg, count: usize, seed: u64) -> (usize, f64) {
    let q = through_m1(g);
    let pair = c_pair(g);
    let verdict = theorem3_check(g, &q, &pair).unwrap().verdict;
    let args = FormulaArgs { exposure: g.vertex("X").unwrap(), outcome: g.vertex("Y").unwrap(), mediator: None, pair };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let scm = DiscreteScm::random(g, &mut rng).unwrap();
        let joint = scm.joint().unwrap();
        for (a, b) in [(1, 0), (0, 1)] {
            let formula = evaluate(g, &joint, &Formula::Thm3 { q: q.clone(), x: a, x_prime: b }, &args).unwrap();
            let truth = scm.counterfactual_mean(&pse_assignment(g, &q, a, b).unwrap(), args.outcome).unwrap();
            worst = worst.max((formula - truth).abs());
        }
    }
    (if verdict { count } else { 0 }, worst)
}

fn criterion_4() -> (Outcome, Vec<String>) {
    let g = fig3a_confounded();
    let report = theorem3_check(&g, &through_m1(&g), &c_pair(&g)).unwrap();
    let failed: Vec<String> = report
        .failed()
        .map(|c| format!("{} ({})", c.label, c.witness.as_ref().map(|w| w.rendered()).unwrap_or_default()))
        .collect();
    let (passing, worst) = pse_discrepancy(&g, ORACLE_SCMS, 401);
    let (chain_passing, chain_worst) = pse_discrepancy(&chain_confounded(), ORACLE_SCMS, 402);
    let o = outcome(
        passing >= ORACLE_SCMS && worst <= ORACLE_TOLERANCE,
        format!("{passing} of {ORACLE_SCMS} models pass the check; failed: {}", failed.join(", ")),
    );
    let info = vec![
        format!("formula vs oracle on the same graph with the check ignored: max discrepancy {worst:.2e} over {ORACLE_SCMS} models"),
        format!("graph without M1 -> Y: {chain_passing} models pass the check, max discrepancy {chain_worst:.2e}"),
    ];
    (o, info)
}

fn graph_config(rng: &mut ChaCha8Rng, max_ordinary: usize) -> RandomGraphConfig {
    RandomGraphConfig {
        vertices: rng.random_range(2..=max_ordinary),
        directed: rng.random_range(0.1..0.5),
        bidirected: rng.random_range(0.1..0.5),
        selection: true,
        selection_parent: rng.random_range(0.1..0.5),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let (mut instances, mut disagreements, mut admissible) = (0, 0, 0);
    while instances < THEOREM1_INSTANCES {
        let cfg = graph_config(&mut rng, 7);
        let g = random_admg(&mut rng, &cfg);
        let Some(inst) = random_adjustment_instance(&mut rng, &g) else { continue };
        let sides = gac_extended_equivalence(&g, &inst.x, &inst.y, &inst.pair).unwrap();
        disagreements += usize::from(!sides.agree());
        admissible += usize::from(sides.original);
        instances += 1;
    }
    outcome(
        disagreements == 0,
        format!("{instances} graphs (up to 8 vertices), {admissible} admissible, {disagreements} disagreements"),
    )
}

fn criterion_6() -> (Outcome, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut literal = (0usize, 0usize, 0usize);
    let mut full = (0usize, 0usize);
    let mut attempts = 0;
    while (literal.0 < LEMMA_GRAPHS || full.0 < LEMMA_GRAPHS) && attempts < 200_000 {
        attempts += 1;
        let cfg = graph_config(&mut rng, 7);
        let g = random_admg(&mut rng, &cfg);
        let Some(inst) = random_adjustment_instance(&mut rng, &g) else { continue };
        if let Some(c) = lemma2_conclusions(&g, &inst.x, &inst.y, &inst.pair, LemmaPremises::Separations).unwrap() {
            literal.0 += 1;
            let bad: Vec<_> = c.iter().filter(|c| c.holds == Some(false)).collect();
            literal.1 += usize::from(!bad.is_empty());
            let s = g.selection().unwrap();
            let explained = g.descendants(&inst.y).unwrap().contains(&s) && bad.iter().all(|c| matches!(c.item, 'g' | 'h'));
            literal.2 += usize::from(!bad.is_empty() && !explained);
        }
        if let Some(c) = lemma2_conclusions(&g, &inst.x, &inst.y, &inst.pair, LemmaPremises::Theorem).unwrap() {
            full.0 += 1;
            full.1 += usize::from(c.iter().any(|c| c.holds == Some(false)));
        }
    }
    let o = outcome(
        literal.0 >= LEMMA_GRAPHS && literal.1 == 0,
        format!("{} graphs satisfying the two premises, {} with a failed conclusion", literal.0, literal.1),
    );
    let info = vec![
        format!("{} of those counterexamples are not explained by S descending from Y", literal.2),
        format!("with all adjustment conditions as premises: {} graphs, {} counterexamples", full.0, full.1),
    ];
    (o, info)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    let (mut queries, mut disagreements) = (0, 0);
    for _ in 0..SEPARATION_GRAPHS {
        let mut cfg = graph_config(&mut rng, 6);
        cfg.selection = rng.random::<bool>();
        let g = random_admg(&mut rng, &cfg);
        for _ in 0..SEPARATION_QUERIES {
            let q = random_separation_query(&mut rng, &g);
            let fast = m_separated(&g, &q).unwrap();
            disagreements += usize::from(fast != open_paths_oracle(&g, &q).unwrap().is_empty());
            queries += 1;
        }
    }
    outcome(disagreements == 0, format!("{SEPARATION_GRAPHS} graphs (up to 7 vertices), {queries} queries, {disagreements} disagreements"))
}

fn criterion_8() -> Outcome {
    let mut checks = Vec::new();
    let g = fig1b();
    let (x, y) = (g.vertex_set(["X"]).unwrap(), g.vertex_set(["Y"]).unwrap());
    checks.push(("fig1b ({C},{C}) admissible", gac_admissible(&g, &x, &y, &c_pair(&g)).unwrap().verdict));
    let empty = gac_admissible(&g, &x, &y, &AdmissiblePair::empty()).unwrap();
    let c3 = empty.condition("gac.3").unwrap();
    let witness = c3.witness.as_ref().map(|w| w.rendered());
    checks.push((
        "fig1b (empty, empty) fails condition 3 with Y ← C → S",
        !empty.verdict && !c3.passed && witness.as_deref() == Some("Y ← C → S"),
    ));

    let g = fig3a();
    let (x, y) = (g.vertex_set(["X"]).unwrap(), g.vertex_set(["Y"]).unwrap());
    let pi = PathSetPi::from_names(&g, x.clone(), y.clone(), &[vec!["X".into(), "M1".into(), "Y".into()]]).unwrap();
    checks.push(("fig3a {X→M1→Y} edge-inconsistent", !edge_consistent(&g, &PseQuery::new(pi)).unwrap().consistent));

    let g = fig3a_bidirected();
    let districts = recanting_districts(&g, &through_m1(&g)).unwrap();
    let want: BTreeSet<_> = g.vertex_set(["M1", "M2"]).unwrap();
    checks.push(("fig3a + M1↔M2 recanting district {M1,M2}", districts.iter().any(|d| d.district == want)));

    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    outcome(failed.is_empty(), if failed.is_empty() { format!("{} golden checks", checks.len()) } else { format!("failed: {}", failed.join("; ")) })
}

/// Largest decomposition residual of one estimation run.
fn decomposition_residual(est: &[EffectEstimate]) -> f64 {
    let mut worst = 0.0f64;
    for adjusted in [false, true] {
        for scale in [Scale::Difference, Scale::RiskRatio] {
            let get = |k| est.iter().find(|e| e.estimand == k && e.adjusted == adjusted && e.scale == scale).map(|e| e.point);
            let (Some(te), Some(nde), Some(nie)) = (get(Estimand::TE), get(Estimand::NDE), get(Estimand::NIE)) else { continue };
            let residual = match scale {
                Scale::Difference => te - (nde + nie),
                Scale::RiskRatio => te - nde * nie,
            };
            worst = worst.max(residual.abs());
        }
    }
    worst
}

fn criterion_9() -> Outcome {
    let mut runs = 0;
    let mut worst = 0.0f64;
    for (i, beta_s) in [0.0, 1.0, 2.0].into_iter().enumerate() {
        let data = run_dgp(&ContinuousDgp { beta_s, seed: 900 + i as u64, ..Default::default() }).unwrap();
        let opts = EstimateOptions { boot: 20, seed: 3, ..Default::default() };
        worst = worst.max(decomposition_residual(&estimate_mediation(&data, &sweep_model(), &opts).unwrap()));
        runs += 1;
    }
    let g = fig1b();
    let spec = ModelSpec {
        exposure: "X".into(),
        mediators: vec!["M".into()],
        outcome: "Y".into(),
        z: vec!["C".into()],
        zt: vec!["C".into()],
        interactions: Interactions::Saturated,
        outcome_family: Family::Logistic,
        mediator_family: Family::Logistic,
    };
    let opts = EstimateOptions { scales: vec![Scale::Difference, Scale::RiskRatio], ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(901);
    for k in 0..20 {
        let scm = DiscreteScm::random(&g, &mut rng).unwrap();
        let data = if k % 2 == 0 { scm.joint().unwrap().to_dataset().unwrap() } else { sample_dataset(&scm, 5_000, &mut rng) };
        worst = worst.max(decomposition_residual(&estimate_mediation(&data, &spec, &opts).unwrap()));
        runs += 1;
    }
    outcome(worst <= DECOMPOSITION_TOLERANCE, format!("{runs} estimation runs on both scales, max residual {worst:.2e}"))
}

fn main() {
    let mut results: Vec<(u32, Outcome, Vec<String>)> = Vec::new();
    let (o1, o2) = criterion_1_and_2();
    results.push((1, o1, vec![]));
    results.push((2, o2, vec![]));
    results.push((3, criterion_3(), vec![]));
    let (o4, i4) = criterion_4();
    results.push((4, o4, i4));
    results.push((5, criterion_5(), vec![]));
    let (o6, i6) = criterion_6();
    results.push((6, o6, i6));
    results.push((7, criterion_7(), vec![]));
    results.push((8, criterion_8(), vec![]));
    results.push((9, criterion_9(), vec![]));

    let mut unexpected = Vec::new();
    for (id, o, info) in &results {
        let known = KNOWN_FAILURES.iter().find(|(k, _)| k == id).map(|(_, why)| *why);
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {id}: {status} - {}", o.detail);
        if let (false, Some(why)) = (o.passed, known) {
            println!("    known failure: {why}");
        }
        for line in info {
            println!("    info: {line}");
        }
        if o.passed == known.is_some() {
            unexpected.push(*id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
