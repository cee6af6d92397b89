//! Plug-in estimator for path-specific counterfactual means with discrete
//! mediators, and the adjustment-formula estimator of `E[Y(x)]`.

use std::collections::HashMap;

use super::data::{ColumnKind, Dataset};
use super::design::Interactions;
use super::glm::Family;
use super::mediation::{attach_intervals, EffectEstimate, Estimand, EstimateOptions, Mode, OuterWeights, Scale};
use super::nuisance::{hajek, Conditional, FitContext, Regression};
use crate::criteria::{edge_consistent, ordered_mediators, theorem3_check, AdmissiblePair, PseQuery};
use crate::error::{EstimateError, GraphError};
use crate::graph::{Admg, Vertex};

type Result<T> = std::result::Result<T, EstimateError>;

/// Upper bound on the number of joint mediator values summed per row.
pub const COMBINATION_LIMIT: u128 = 1 << 12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PseSpec {
    pub interactions: Interactions,
    /// Skip the identification check.
    pub force: bool,
}

struct PseModels {
    mediators: Vec<MediatorModel>,
    outcome: Regression,
    /// Whether the exposure is a regressor of the outcome model.
    outcome_reads_x: bool,
    /// Data columns of the adjustment set.
    z_cols: Vec<usize>,
}

struct MediatorModel {
    model: Conditional,
    reads_x: bool,
    /// Positions (in mediator order) of mediator parents.
    parents: Vec<usize>,
    support: Vec<f64>,
}

fn single(g: &Admg, set: &crate::VertexSet, role: &str) -> Result<Vertex> {
    match set.iter().collect::<Vec<_>>()[..] {
        [v] => Ok(*v),
        _ => Err(EstimateError::InvalidSpec(format!(
            "the adjustment formulas take a single {role}, got {:?}",
            g.names_of(set)
        ))),
    }
}

fn parse_level(label: &str) -> Result<f64> {
    label
        .parse()
        .map_err(|_| EstimateError::InvalidSpec(format!("exposure level `{label}` is not numeric")))
}

#[allow(clippy::too_many_arguments)]
fn fit_pse_models(
    data: &Dataset,
    g: &Admg,
    x: Vertex,
    y: Vertex,
    mediators: &[Vertex],
    pair: &AdmissiblePair,
    spec: &PseSpec,
    opts: &EstimateOptions,
    rows: &[usize],
    weights: &[f64],
) -> Result<PseModels> {
    let ctx = FitContext { data, rows, weights, interactions: spec.interactions, glm: &opts.glm };
    let z: Vec<String> = g.names_of(&pair.z);
    let x_name = g.name(x).to_string();
    let mut fitted = Vec::with_capacity(mediators.len());
    for &m in mediators {
        let name = g.name(m);
        if data.column(name)?.kind == ColumnKind::Continuous {
            return Err(EstimateError::InvalidSpec(format!("mediator `{name}` must be binary or categorical")));
        }
        let reads_x = g.parents(m).contains(&x);
        let parents: Vec<usize> = mediators
            .iter()
            .enumerate()
            .filter(|(_, p)| g.parents(m).contains(p))
            .map(|(i, _)| i)
            .collect();
        let mut vars = Vec::new();
        if reads_x {
            vars.push(x_name.clone());
        }
        vars.extend(parents.iter().map(|&i| g.name(mediators[i]).to_string()));
        vars.extend(z.iter().cloned());
        let model = Conditional::fit(&ctx, name, &vars, Family::Logistic)?;
        let support = model.support();
        fitted.push(MediatorModel { model, reads_x, parents, support });
    }
    let outcome_reads_x = g.parents(y).contains(&x);
    let mut vars = Vec::new();
    if outcome_reads_x {
        vars.push(x_name);
    }
    vars.extend(mediators.iter().map(|&m| g.name(m).to_string()));
    vars.extend(z.iter().cloned());
    let family = match data.column(g.name(y))?.kind {
        ColumnKind::Binary => Family::Logistic,
        _ => Family::Linear,
    };
    let outcome = Regression::fit(&ctx, g.name(y), &vars, &[], family, None, &|v| v)?;
    let z_cols = z.iter().map(|c| data.column_index(c)).collect::<Result<_>>()?;
    Ok(PseModels { mediators: fitted, outcome, outcome_reads_x, z_cols })
}

impl PseModels {
    /// Sum over joint mediator values for one covariate row.
    /// `x_of[i]` is the exposure level read by mediator `i`; `x_y` by the outcome.
    fn row_mean(&self, zvals: &[f64], x_of: &[f64], x_y: f64, buf: &mut Vec<f64>) -> Result<f64> {
        let k = self.mediators.len();
        let mut idx = vec![0usize; k];
        let mut m = vec![0.0; k];
        let mut total = 0.0;
        let mut vals = Vec::new();
        loop {
            for i in 0..k {
                m[i] = self.mediators[i].support[idx[i]];
            }
            let mut weight = 1.0;
            for (i, med) in self.mediators.iter().enumerate() {
                vals.clear();
                if med.reads_x {
                    vals.push(x_of[i]);
                }
                vals.extend(med.parents.iter().map(|&p| m[p]));
                vals.extend_from_slice(zvals);
                let dist = med.model.distribution(&vals, buf)?;
                weight *= dist[idx[i]].1;
                if weight == 0.0 {
                    break;
                }
            }
            if weight != 0.0 {
                vals.clear();
                if self.outcome_reads_x {
                    vals.push(x_y);
                }
                vals.extend_from_slice(&m);
                vals.extend_from_slice(zvals);
                total += weight * self.outcome.mean(&vals, buf)?;
            }
            // Advance the mixed-radix counter.
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(total);
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < self.mediators[i].support.len() {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    /// Per-row means for each assignment, memoised on covariate values.
    fn impute(&self, data: &Dataset, rows: &[usize], assignments: &[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![Vec::with_capacity(rows.len()); assignments.len()];
        let mut memo: HashMap<Vec<u64>, Vec<f64>> = HashMap::new();
        let mut buf = Vec::new();
        let mut zvals = vec![0.0; self.z_cols.len()];
        for &r in rows {
            for (j, &c) in self.z_cols.iter().enumerate() {
                zvals[j] = data.value(c, r)?;
            }
            let key: Vec<u64> = zvals.iter().map(|v| v.to_bits()).collect();
            if !memo.contains_key(&key) {
                let values = assignments
                    .iter()
                    .map(|(x_of, x_y)| self.row_mean(&zvals, x_of, *x_y, &mut buf))
                    .collect::<Result<Vec<_>>>()?;
                memo.insert(key.clone(), values);
            }
            for (slot, v) in out.iter_mut().zip(&memo[&key]) {
                slot.push(*v);
            }
        }
        Ok(out)
    }
}

struct Prepared {
    x: Vertex,
    y: Vertex,
    mediators: Vec<Vertex>,
    /// Exposure level per mediator and for the outcome under π.
    active: (Vec<f64>, f64),
    reference: (Vec<f64>, f64),
}

fn prepare(g: &Admg, q: &PseQuery, pair: &AdmissiblePair, spec: &PseSpec) -> Result<Prepared> {
    let x = single(g, q.exposure(), "exposure")?;
    let y = single(g, q.outcome(), "outcome")?;
    let consistency = edge_consistent(g, q)?;
    if let Some((a, b)) = consistency.split {
        return Err(EstimateError::EdgeInconsistent(format!("{} → {}", g.name(a), g.name(b))));
    }
    if !spec.force {
        let report = theorem3_check(g, q, pair).map_err(|e| match e {
            GraphError::EdgeInconsistent(s) => EstimateError::EdgeInconsistent(s),
            other => other.into(),
        })?;
        if !report.verdict {
            let failed: Vec<String> = report.failed().map(|c| c.label.clone()).collect();
            return Err(EstimateError::IdentificationCheckFailed(failed.join(", ")));
        }
    }
    let mediators = ordered_mediators(g, q.exposure(), q.outcome())?;
    let (xa, xr) = (parse_level(&q.x_active)?, parse_level(&q.x_reference)?);
    let level = |head: Vertex| if consistency.active.contains(&(x, head)) { xa } else { xr };
    let active = (mediators.iter().map(|&m| level(m)).collect(), level(y));
    let reference = (vec![xr; mediators.len()], xr);
    Ok(Prepared { x, y, mediators, active, reference })
}

/// `[mean under π, mean under the reference assignment]` per mode.
fn pse_means(
    data: &Dataset,
    g: &Admg,
    prep: &Prepared,
    pair: &AdmissiblePair,
    spec: &PseSpec,
    opts: &EstimateOptions,
) -> Result<Vec<(Mode, f64, f64)>> {
    let zt = g.names_of(&pair.zt);
    let need_adjusted = opts.modes.iter().any(|m| m.is_adjusted());
    let outer = OuterWeights::build(data, &zt, spec.interactions, &opts.glm, need_adjusted)?;
    let mut cols: Vec<String> = vec![g.name(prep.x).to_string(), g.name(prep.y).to_string()];
    cols.extend(prep.mediators.iter().map(|&m| g.name(m).to_string()));
    cols.extend(g.names_of(&pair.z));
    data.require_complete(&cols, &outer.rows)?;

    let mut combos: u128 = 1;
    for &m in &prep.mediators {
        combos = combos.saturating_mul(data.levels(g.name(m), &outer.rows)?.len() as u128);
    }
    if combos > COMBINATION_LIMIT {
        return Err(EstimateError::CombinatorialGuard { combinations: combos, limit: COMBINATION_LIMIT });
    }

    let assignments = [prep.active.clone(), prep.reference.clone()];
    let mut shared: Option<Vec<Vec<f64>>> = None;
    let mut out = Vec::new();
    for &mode in &opts.modes {
        let imputed = match &shared {
            Some(s) if !opts.weight_nuisance => s.clone(),
            _ => {
                let fit_w = if opts.weight_nuisance { outer.for_mode(mode) } else { &outer.naive };
                let models = fit_pse_models(data, g, prep.x, prep.y, &prep.mediators, pair, spec, opts, &outer.rows, fit_w)?;
                let imputed = models.impute(data, &outer.rows, &assignments)?;
                if !opts.weight_nuisance {
                    shared = Some(imputed.clone());
                }
                imputed
            }
        };
        let w = outer.for_mode(mode);
        out.push((mode, hajek(&imputed[0], w), hajek(&imputed[1], w)));
    }
    Ok(out)
}

fn pse_values(means: &[(Mode, f64, f64)], scales: &[Scale]) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for &(_, pi, reference) in means {
        values.push(pi);
        for &scale in scales {
            values.push(match scale {
                Scale::Difference => pi - reference,
                Scale::RiskRatio => {
                    if reference == 0.0 {
                        return Err(EstimateError::DegenerateOutcome(reference));
                    }
                    pi / reference
                }
            });
        }
    }
    Ok(values)
}

/// Path-specific mean `E[Y(π, x, x')]` and its contrast with the all-reference
/// mean `E[Y(x')]`, per requested mode. For each mode the first entry is the
/// mean (`PseMean`, reported on the difference scale), followed by one `PSE`
/// entry per scale.
pub fn estimate_pse(
    data: &Dataset,
    g: &Admg,
    q: &PseQuery,
    pair: &AdmissiblePair,
    spec: &PseSpec,
    opts: &EstimateOptions,
) -> Result<Vec<EffectEstimate>> {
    let prep = prepare(g, q, pair, spec)?;
    if opts.scales.contains(&Scale::RiskRatio) && data.column(g.name(prep.y))?.kind != ColumnKind::Binary {
        return Err(EstimateError::RatioScaleRequiresBinaryOutcome);
    }
    let points = pse_values(&pse_means(data, g, &prep, pair, spec, opts)?, &opts.scales)?;
    let mut labels = Vec::new();
    for &mode in &opts.modes {
        labels.push((mode, Scale::Difference, Estimand::PseMean));
        for &scale in &opts.scales {
            labels.push((mode, scale, Estimand::PSE));
        }
    }
    attach_intervals(data, opts, &labels, points, |d| {
        pse_values(&pse_means(d, g, &prep, pair, spec, opts)?, &opts.scales)
    })
}

/// The adjustment-formula estimate of `E[Y(x)]`: outcome regressed on
/// exposure and `z` over the analysis rows, averaged over those rows.
#[allow(clippy::too_many_arguments)]
pub fn estimate_total_mean(
    data: &Dataset,
    exposure: &str,
    outcome: &str,
    z: &[String],
    zt: &[String],
    x: f64,
    interactions: Interactions,
    mode: Mode,
    opts: &EstimateOptions,
) -> Result<f64> {
    let outer = OuterWeights::build(data, zt, interactions, &opts.glm, mode.is_adjusted())?;
    let mut vars = vec![exposure.to_string()];
    vars.extend(z.iter().cloned());
    let fit_w = if opts.weight_nuisance { outer.for_mode(mode) } else { &outer.naive };
    let ctx = FitContext { data, rows: &outer.rows, weights: fit_w, interactions, glm: &opts.glm };
    let family = match data.column(outcome)?.kind {
        ColumnKind::Binary => Family::Logistic,
        _ => Family::Linear,
    };
    let model = Regression::fit(&ctx, outcome, &vars, &[], family, None, &|v| v)?;
    let z_cols: Vec<usize> = z.iter().map(|c| data.column_index(c)).collect::<Result<_>>()?;
    let mut buf = Vec::new();
    let mut vals = vec![x; 1 + z.len()];
    let mut values = Vec::with_capacity(outer.rows.len());
    for &r in &outer.rows {
        for (j, &c) in z_cols.iter().enumerate() {
            vals[1 + j] = data.value(c, r)?;
        }
        values.push(model.mean(&vals, &mut buf)?);
    }
    Ok(hajek(&values, outer.for_mode(mode)))
}
