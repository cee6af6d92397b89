//! Large-sample checks of the estimators against the exact oracle.

mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use selmed::estimate::mediation::nested_means;
use selmed::estimate::{estimate_pse, EstimateOptions, Estimand, Family, Interactions, Mode, ModelSpec, PseSpec};
use selmed::oracle::{pse_assignment, uniform_assignment, Assignment, DiscreteScm};

#[test]
fn forward_simulation_matches_enumeration() {
    let g = fig1b();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let scm = DiscreteScm::random(&g, &mut rng).unwrap();
    let (x, y) = (g.vertex("X").unwrap(), g.vertex("Y").unwrap());
    let yk = scm.observed().iter().position(|&v| v == y).unwrap();
    for value in 0..2 {
        let a = uniform_assignment(&g, x, y, value).unwrap();
        let exact = scm.counterfactual_mean(&a, y).unwrap();
        let n = 10_000_000usize;
        let mut hits = 0usize;
        for _ in 0..n / 500_000 {
            hits += scm.sample_under(&a, 500_000, &mut rng).iter().filter(|(v, _)| v[yk] == 1).count();
        }
        let mean = hits as f64 / n as f64;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact}");
    }
}

#[test]
fn adjusted_mediation_estimate_converges_to_oracle() {
    let g = fig1b();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let scm = DiscreteScm::random(&g, &mut rng).unwrap();
    let data = sample_dataset(&scm, 1_000_000, &mut rng);
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
    let opts = EstimateOptions { modes: vec![Mode::Adjusted], ..Default::default() };
    let (_, means) = nested_means(&data, &spec, &opts).unwrap()[0];
    let (x, m, y) = (g.vertex("X").unwrap(), g.vertex("M").unwrap(), g.vertex("Y").unwrap());
    let truth = |a: usize, b: usize| {
        let assignment: Assignment = [((x, y), a), ((x, m), b)].into();
        scm.counterfactual_mean(&assignment, y).unwrap()
    };
    assert!((means.active_reference - truth(1, 0)).abs() < 0.01);
    assert!((means.active_active - truth(1, 1)).abs() < 0.01);
    assert!((means.reference_reference - truth(0, 0)).abs() < 0.01);
}

#[test]
fn path_specific_estimate_converges_to_oracle() {
    // The mediator condition fails here (M2 <- M1 -> Y), so the check is
    // overridden; the graph has no hidden confounding and the plug-in
    // formula still targets the edge assignment.
    let g = fig3a_confounded();
    let q = through_m1(&g);
    let pair = c_pair(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let scm = DiscreteScm::random(&g, &mut rng).unwrap();
    let data = sample_dataset(&scm, 1_000_000, &mut rng);
    let opts = EstimateOptions { modes: vec![Mode::Adjusted], ..Default::default() };
    let spec = PseSpec { interactions: Interactions::Saturated, force: true };
    let est = estimate_pse(&data, &g, &q, &pair, &spec, &opts).unwrap();
    let mean = est.iter().find(|e| e.estimand == Estimand::PseMean).unwrap().point;
    let truth = scm.counterfactual_mean(&pse_assignment(&g, &q, 1, 0).unwrap(), g.vertex("Y").unwrap()).unwrap();
    assert!((mean - truth).abs() < 0.01, "{mean} vs {truth}");
}
