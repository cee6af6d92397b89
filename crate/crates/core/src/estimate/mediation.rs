//! Natural direct and indirect effects by counterfactual imputation.
//!
//! The nested mean `E[Y(x, M(x'))]` is the average over analysis rows of
//! `sum_m E[Y | x, m, z_i] p(m | x', z_i)`, with nuisances fit on the
//! analysis rows. The adjusted estimator reweights that outer average by
//! `P(S=1) / P(S=1 | zt_i)`; the naive one does not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_replicates, percentile};
use super::data::{ColumnKind, Dataset};
use super::design::Interactions;
use super::glm::{Family, GlmOptions};
use super::nuisance::{hajek, Conditional, FitContext, Regression};
use super::weights::selection_weights;
use crate::error::EstimateError;

type Result<T> = std::result::Result<T, EstimateError>;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub exposure: String,
    pub mediators: Vec<String>,
    pub outcome: String,
    pub z: Vec<String>,
    pub zt: Vec<String>,
    pub interactions: Interactions,
    pub outcome_family: Family,
    pub mediator_family: Family,
}

impl ModelSpec {
    pub(crate) fn validate(&self, data: &Dataset) -> Result<()> {
        if let Some(t) = self.zt.iter().find(|t| !self.z.contains(t)) {
            return Err(EstimateError::InvalidSpec(format!("zt column `{t}` is not in z")));
        }
        let mut seen = std::collections::BTreeSet::new();
        let roles = std::iter::once(&self.exposure)
            .chain(&self.mediators)
            .chain(std::iter::once(&self.outcome))
            .chain(&self.z);
        for name in roles {
            data.column_index(name)?;
            if !seen.insert(name.as_str()) {
                return Err(EstimateError::InvalidSpec(format!("column `{name}` has two roles")));
            }
        }
        if seen.contains(data.selection_name()) {
            return Err(EstimateError::InvalidSpec("the selection column cannot be a model variable".into()));
        }
        if self.outcome_family == Family::Logistic && data.column(&self.outcome)?.kind != ColumnKind::Binary {
            return Err(EstimateError::InvalidSpec(format!("logistic outcome `{}` must be binary", self.outcome)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Difference,
    RiskRatio,
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "diff" | "difference" => Ok(Scale::Difference),
            "rr" | "risk-ratio" => Ok(Scale::RiskRatio),
            other => Err(format!("unknown scale `{other}` (diff|rr)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Naive,
    Adjusted,
}

impl Mode {
    pub fn is_adjusted(self) -> bool {
        self == Mode::Adjusted
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Naive => "naive",
            Mode::Adjusted => "adjusted",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimand {
    TE,
    NDE,
    NIE,
    /// Path-specific contrast against the all-reference assignment.
    PSE,
    /// The path-specific counterfactual mean itself.
    PseMean,
}

impl std::fmt::Display for Estimand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Estimand::TE => "TE",
            Estimand::NDE => "NDE",
            Estimand::NIE => "NIE",
            Estimand::PSE => "PSE",
            Estimand::PseMean => "PSE_MEAN",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    pub scales: Vec<Scale>,
    pub modes: Vec<Mode>,
    pub boot: usize,
    pub seed: u64,
    pub level: f64,
    pub mc_draws: usize,
    /// Also apply selection weights inside the nuisance fits.
    pub weight_nuisance: bool,
    pub glm: GlmOptions,
    pub x_active: f64,
    pub x_reference: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            scales: vec![Scale::Difference],
            modes: vec![Mode::Naive, Mode::Adjusted],
            boot: 0,
            seed: 1,
            level: 0.95,
            mc_draws: 200,
            weight_nuisance: false,
            glm: GlmOptions::default(),
            x_active: 1.0,
            x_reference: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub estimand: Estimand,
    pub scale: Scale,
    pub adjusted: bool,
    pub point: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub bootstrap_reps: usize,
    pub seed: u64,
}

/// `E[Y(a, M(a))]`, `E[Y(a, M(r))]` and `E[Y(r, M(r))]` for active `a` and
/// reference `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NestedMeans {
    pub active_active: f64,
    pub active_reference: f64,
    pub reference_reference: f64,
}

impl NestedMeans {
    fn effect(&self, estimand: Estimand, scale: Scale) -> Result<f64> {
        let (m11, m10, m00) = (self.active_active, self.active_reference, self.reference_reference);
        match scale {
            Scale::Difference => Ok(match estimand {
                Estimand::TE => m11 - m00,
                Estimand::NDE => m10 - m00,
                Estimand::NIE => m11 - m10,
                _ => unreachable!("not a mediation estimand"),
            }),
            Scale::RiskRatio => {
                let (num, den) = match estimand {
                    Estimand::TE => (m11, m00),
                    Estimand::NDE => (m10, m00),
                    Estimand::NIE => (m11, m10),
                    _ => unreachable!("not a mediation estimand"),
                };
                if den == 0.0 {
                    return Err(EstimateError::DegenerateOutcome(den));
                }
                Ok(num / den)
            }
        }
    }
}

pub(crate) const MEDIATION_ESTIMANDS: [Estimand; 3] = [Estimand::TE, Estimand::NDE, Estimand::NIE];

/// Per-row outer weights for a mode, aligned with `data.analysis_rows()`.
pub(crate) struct OuterWeights {
    pub rows: Vec<usize>,
    pub naive: Vec<f64>,
    pub adjusted: Option<Vec<f64>>,
}

impl OuterWeights {
    pub fn build(data: &Dataset, zt: &[String], interactions: Interactions, glm: &GlmOptions, need_adjusted: bool) -> Result<Self> {
        let rows = data.analysis_rows();
        if rows.is_empty() {
            return Err(EstimateError::NoRows);
        }
        let naive: Vec<f64> = rows.iter().map(|&r| data.frequency(r)).collect();
        let adjusted = if need_adjusted {
            let w = selection_weights(data, zt, interactions, glm)?;
            Some(w.weights.iter().zip(&naive).map(|(a, b)| a * b).collect())
        } else {
            None
        };
        Ok(OuterWeights { rows, naive, adjusted })
    }

    pub fn for_mode(&self, mode: Mode) -> &[f64] {
        match mode {
            Mode::Naive => &self.naive,
            Mode::Adjusted => self.adjusted.as_deref().expect("adjusted weights requested"),
        }
    }
}

struct MediationModels {
    outcome: Regression,
    mediator: Conditional,
}

fn fit_models(data: &Dataset, spec: &ModelSpec, rows: &[usize], weights: &[f64], glm: &GlmOptions) -> Result<MediationModels> {
    let ctx = FitContext { data, rows, weights, interactions: spec.interactions, glm };
    let m = &spec.mediators[0];
    let mut y_vars = vec![spec.exposure.clone(), m.clone()];
    y_vars.extend(spec.z.iter().cloned());
    let forced = [(spec.exposure.clone(), m.clone())];
    let outcome = Regression::fit(&ctx, &spec.outcome, &y_vars, &forced, spec.outcome_family, None, &|v| v)?;
    let mut m_vars = vec![spec.exposure.clone()];
    m_vars.extend(spec.z.iter().cloned());
    let mediator = Conditional::fit(&ctx, m, &m_vars, spec.mediator_family)?;
    Ok(MediationModels { outcome, mediator })
}

/// Row-level imputations of the three nested means.
fn impute(
    data: &Dataset,
    spec: &ModelSpec,
    models: &MediationModels,
    rows: &[usize],
    opts: &EstimateOptions,
    draws: &[f64],
) -> Result<[Vec<f64>; 3]> {
    let z_cols: Vec<usize> = spec.z.iter().map(|c| data.column_index(c)).collect::<Result<_>>()?;
    let (a, r) = (opts.x_active, opts.x_reference);
    let pairs = [(a, a), (a, r), (r, r)];
    let mut out = [Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len())];
    let mut buf = Vec::new();
    let mut y_vals = vec![0.0; 2 + z_cols.len()];
    let mut m_vals = vec![0.0; 1 + z_cols.len()];
    for &row in rows {
        for (j, &c) in z_cols.iter().enumerate() {
            let v = data.value(c, row)?;
            y_vals[2 + j] = v;
            m_vals[1 + j] = v;
        }
        for (k, &(x_y, x_m)) in pairs.iter().enumerate() {
            m_vals[0] = x_m;
            y_vals[0] = x_y;
            let value = if models.mediator.is_discrete() {
                let mut acc = 0.0;
                for (m, p) in models.mediator.distribution(&m_vals, &mut buf)? {
                    y_vals[1] = m;
                    acc += p * models.outcome.mean(&y_vals, &mut buf)?;
                }
                acc
            } else {
                let (mean, sd) = models.mediator.gaussian(&m_vals, &mut buf)?;
                if spec.outcome_family == Family::Linear {
                    y_vals[1] = mean;
                    models.outcome.mean(&y_vals, &mut buf)?
                } else {
                    let mut acc = 0.0;
                    for &e in draws {
                        y_vals[1] = mean + sd * e;
                        acc += models.outcome.mean(&y_vals, &mut buf)?;
                    }
                    acc / draws.len() as f64
                }
            };
            out[k].push(value);
        }
    }
    Ok(out)
}

/// Nested means for each requested mode, in `opts.modes` order.
pub fn nested_means(data: &Dataset, spec: &ModelSpec, opts: &EstimateOptions) -> Result<Vec<(Mode, NestedMeans)>> {
    spec.validate(data)?;
    if spec.mediators.len() != 1 {
        return Err(EstimateError::InvalidSpec(format!(
            "natural effects take exactly one mediator, got {}",
            spec.mediators.len()
        )));
    }
    let need_adjusted = opts.modes.iter().any(|m| m.is_adjusted());
    let outer = OuterWeights::build(data, &spec.zt, spec.interactions, &opts.glm, need_adjusted)?;
    let mut model_cols = vec![spec.exposure.clone(), spec.mediators[0].clone(), spec.outcome.clone()];
    model_cols.extend(spec.z.iter().cloned());
    data.require_complete(&model_cols, &outer.rows)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws: Vec<f64> = (0..opts.mc_draws.max(1)).map(|_| rng.sample(StandardNormal)).collect();

    let mut shared: Option<[Vec<f64>; 3]> = None;
    let mut out = Vec::with_capacity(opts.modes.len());
    for &mode in &opts.modes {
        let fit_weights = if opts.weight_nuisance { outer.for_mode(mode) } else { &outer.naive };
        let imputed = if opts.weight_nuisance || shared.is_none() {
            let models = fit_models(data, spec, &outer.rows, fit_weights, &opts.glm)?;
            let imputed = impute(data, spec, &models, &outer.rows, opts, &draws)?;
            if !opts.weight_nuisance {
                shared = Some(imputed.clone());
            }
            imputed
        } else {
            shared.clone().expect("shared imputations")
        };
        let w = outer.for_mode(mode);
        out.push((
            mode,
            NestedMeans {
                active_active: hajek(&imputed[0], w),
                active_reference: hajek(&imputed[1], w),
                reference_reference: hajek(&imputed[2], w),
            },
        ));
    }
    Ok(out)
}

fn point_values(data: &Dataset, spec: &ModelSpec, opts: &EstimateOptions) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (_, means) in nested_means(data, spec, opts)? {
        for &scale in &opts.scales {
            for estimand in MEDIATION_ESTIMANDS {
                values.push(means.effect(estimand, scale)?);
            }
        }
    }
    Ok(values)
}

/// TE, NDE and NIE for every requested mode and scale (mode-major order).
pub fn estimate_mediation(data: &Dataset, spec: &ModelSpec, opts: &EstimateOptions) -> Result<Vec<EffectEstimate>> {
    if opts.scales.contains(&Scale::RiskRatio) && data.column(&spec.outcome)?.kind != ColumnKind::Binary {
        return Err(EstimateError::RatioScaleRequiresBinaryOutcome);
    }
    let points = point_values(data, spec, opts)?;
    let labels: Vec<(Mode, Scale, Estimand)> = opts
        .modes
        .iter()
        .flat_map(|&m| opts.scales.iter().flat_map(move |&s| MEDIATION_ESTIMANDS.map(|e| (m, s, e))))
        .collect();
    attach_intervals(data, opts, &labels, points, |d| point_values(d, spec, opts))
}

/// Wraps point estimates, adding percentile intervals when `opts.boot > 0`.
pub(crate) fn attach_intervals<F>(
    data: &Dataset,
    opts: &EstimateOptions,
    labels: &[(Mode, Scale, Estimand)],
    points: Vec<f64>,
    estimator: F,
) -> Result<Vec<EffectEstimate>>
where
    F: Fn(&Dataset) -> Result<Vec<f64>> + Sync,
{
    debug_assert_eq!(labels.len(), points.len());
    let mut intervals = vec![(None, None); points.len()];
    if opts.boot > 0 {
        if data.frequencies().is_some() {
            return Err(EstimateError::InvalidSpec("bootstrap resamples rows and cannot use frequency weights".into()));
        }
        let reps = bootstrap_replicates(data.n_rows(), opts.boot, opts.seed, |rows| estimator(&data.take_rows(rows)))?;
        let alpha = (1.0 - opts.level) / 2.0;
        for (j, slot) in intervals.iter_mut().enumerate() {
            let column: Vec<f64> = reps.iter().map(|r| r[j]).collect();
            *slot = (Some(percentile(&column, alpha)), Some(percentile(&column, 1.0 - alpha)));
        }
    }
    Ok(labels
        .iter()
        .zip(points)
        .zip(intervals)
        .map(|((&(mode, scale, estimand), point), (ci_low, ci_high))| EffectEstimate {
            estimand,
            scale,
            adjusted: mode.is_adjusted(),
            point,
            ci_low,
            ci_high,
            bootstrap_reps: opts.boot,
            seed: opts.seed,
        })
        .collect())
}
