mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use selmed::estimate::{
    estimate_mediation, selection_weights, Column, ColumnKind, Dataset, EffectEstimate, EstimateOptions, Estimand,
    GlmOptions, Interactions, Mode, Scale,
};
use selmed::oracle::sweep::sweep_model;
use selmed::oracle::{run_dgp, ContinuousDgp, DiscreteScm, SelectionModel, TRUE_NDE, TRUE_NIE};

fn get(est: &[EffectEstimate], estimand: Estimand, adjusted: bool) -> &EffectEstimate {
    est.iter().find(|e| e.estimand == estimand && e.adjusted == adjusted && e.scale == Scale::Difference).unwrap()
}

#[test]
fn large_sample_recovers_simulation_truth() {
    let data = run_dgp(&ContinuousDgp { beta_s: 0.0, n0: 220_000, n: 100_000, seed: 51 }).unwrap();
    let est = estimate_mediation(&data, &sweep_model(), &EstimateOptions::default()).unwrap();
    for adjusted in [false, true] {
        assert!((get(&est, Estimand::NIE, adjusted).point - TRUE_NIE).abs() < 0.1);
        assert!((get(&est, Estimand::NDE, adjusted).point - TRUE_NDE).abs() < 0.05);
    }
}

#[test]
fn selection_weights_average_one_among_selected() {
    // E[P(S=1) / P(S=1 | C) | S=1] = 1 for any selection model on C.
    let data = run_dgp(&ContinuousDgp { beta_s: 1.0, seed: 52, ..Default::default() }).unwrap();
    let w = selection_weights(&data, &["C".to_string()], Interactions::None, &GlmOptions::default()).unwrap();
    assert!((w.mean(&data) - 1.0).abs() < 0.05, "{}", w.mean(&data));
    assert!(w.weights.iter().all(|&x| x > 0.0 && x.is_finite()));
    let slope = w.fit.as_ref().unwrap().coefficients[1];
    assert!((slope - 1.0).abs() < 0.2, "{slope}");
}

#[test]
fn null_outcome_gives_null_effects() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let n = 2000;
    let (mut x, mut c, mut m, mut y, mut s) = (vec![], vec![], vec![], vec![], vec![]);
    for _ in 0..n {
        let ci: f64 = rng.sample(StandardNormal);
        let xi = f64::from(u8::from(rng.random::<bool>()));
        x.push(xi);
        c.push(ci);
        m.push(xi + ci + rng.sample::<f64, _>(StandardNormal));
        y.push(0.5 * ci + rng.sample::<f64, _>(StandardNormal));
        s.push(f64::from(u8::from(rng.random::<f64>() < 0.5)));
    }
    let data = Dataset::new(
        vec![
            Column::dense("X", ColumnKind::Binary, &x),
            Column::dense("C", ColumnKind::Continuous, &c),
            Column::dense("M", ColumnKind::Continuous, &m),
            Column::dense("Y", ColumnKind::Continuous, &y),
            Column::dense("S", ColumnKind::Binary, &s),
        ],
        "S",
    )
    .unwrap();
    let opts = EstimateOptions { boot: 200, seed: 3, ..Default::default() };
    let est = estimate_mediation(&data, &sweep_model(), &opts).unwrap();
    for e in est.iter().filter(|e| e.estimand != Estimand::TE) {
        let (lo, hi) = (e.ci_low.unwrap(), e.ci_high.unwrap());
        assert!(lo <= 0.0 && 0.0 <= hi, "{e:?}");
    }
}

#[test]
fn bootstrap_estimates_are_reproducible() {
    let data = run_dgp(&ContinuousDgp { beta_s: 1.0, n0: 3000, n: 500, seed: 54 }).unwrap();
    let opts = EstimateOptions { boot: 50, seed: 9, ..Default::default() };
    let a = estimate_mediation(&data, &sweep_model(), &opts).unwrap();
    let b = estimate_mediation(&data, &sweep_model(), &opts).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|e| e.bootstrap_reps == 50 && e.ci_low.unwrap() <= e.ci_high.unwrap()));
}

#[test]
fn inert_selection_makes_modes_coincide() {
    let g = common::fig1b();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let scm = DiscreteScm::random(&g, &mut rng)
        .unwrap()
        .with_selection(SelectionModel { intercept: -0.4, coefficients: vec![0.0] })
        .unwrap();
    let data = scm.joint().unwrap().to_dataset().unwrap();
    let mut spec = sweep_model();
    spec.interactions = Interactions::Saturated;
    spec.outcome_family = selmed::estimate::Family::Logistic;
    spec.mediator_family = selmed::estimate::Family::Logistic;
    let est = estimate_mediation(&data, &spec, &EstimateOptions::default()).unwrap();
    for k in [Estimand::TE, Estimand::NDE, Estimand::NIE] {
        assert!((get(&est, k, false).point - get(&est, k, true).point).abs() < 1e-9);
    }
    let modes: Vec<Mode> = est.iter().map(|e| if e.adjusted { Mode::Adjusted } else { Mode::Naive }).collect();
    assert_eq!(modes[0], Mode::Naive);
}
