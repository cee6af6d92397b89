//! Fitted conditional means and mediator distributions.

use super::data::{ColumnKind, Dataset};
use super::design::{Design, Interactions};
use super::glm::{fit_glm, Family, GlmFit, GlmOptions};
use crate::error::EstimateError;

type Result<T> = std::result::Result<T, EstimateError>;

/// A response regressed on named columns.
#[derive(Clone, Debug)]
pub(crate) struct Regression {
    pub design: Design,
    pub fit: GlmFit,
}

/// Everything a nuisance fit needs besides the response and regressors.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FitContext<'a> {
    pub data: &'a Dataset,
    pub rows: &'a [usize],
    /// Case weights aligned with `rows`.
    pub weights: &'a [f64],
    pub interactions: Interactions,
    pub glm: &'a GlmOptions,
}

impl Regression {
    pub fn fit(
        ctx: &FitContext<'_>,
        response: &str,
        vars: &[String],
        forced: &[(String, String)],
        family: Family,
        subset: Option<&dyn Fn(f64) -> bool>,
        transform: &dyn Fn(f64) -> f64,
    ) -> Result<Regression> {
        let col = ctx.data.column_index(response)?;
        let mut rows = Vec::with_capacity(ctx.rows.len());
        let mut weights = Vec::with_capacity(ctx.rows.len());
        let mut y = Vec::with_capacity(ctx.rows.len());
        for (&r, &w) in ctx.rows.iter().zip(ctx.weights) {
            let v = ctx.data.value(col, r)?;
            // Zero-weight rows carry no information and would leave empty cells.
            if w > 0.0 && subset.is_none_or(|keep| keep(v)) {
                rows.push(r);
                weights.push(w);
                y.push(transform(v));
            }
        }
        if rows.is_empty() {
            return Err(EstimateError::NoRows);
        }
        let design = Design::learn(ctx.data, &rows, vars, ctx.interactions, forced)?;
        let x = design.matrix(ctx.data, &rows)?;
        let terms: Vec<String> = design.names().iter().map(|t| format!("{response}: {t}")).collect();
        let fit = fit_glm(&x, &y, Some(&weights), family, &terms, ctx.glm)?;
        Ok(Regression { design, fit })
    }

    pub fn mean(&self, values: &[f64], buf: &mut Vec<f64>) -> Result<f64> {
        self.design.features_into(values, buf)?;
        Ok(self.fit.mean(buf))
    }
}

/// Conditional distribution of a mediator given its regressors.
#[derive(Clone, Debug)]
pub(crate) enum Conditional {
    Bernoulli(Regression),
    /// Continuation-ratio logits: stage `k` models `P(M = levels[k] | M >= levels[k])`.
    Ordered { levels: Vec<f64>, stages: Vec<Regression> },
    Gaussian(Regression),
}

impl Conditional {
    pub fn fit(ctx: &FitContext<'_>, response: &str, vars: &[String], family: Family) -> Result<Conditional> {
        let kind = ctx.data.column(response)?.kind;
        match (family, kind) {
            (Family::Linear, _) => Ok(Conditional::Gaussian(Regression::fit(ctx, response, vars, &[], Family::Linear, None, &|v| v)?)),
            (Family::Logistic, ColumnKind::Binary) => Ok(Conditional::Bernoulli(Regression::fit(
                ctx,
                response,
                vars,
                &[],
                Family::Logistic,
                None,
                &|v| v,
            )?)),
            (Family::Logistic, ColumnKind::Categorical) => {
                let levels = ctx.data.levels(response, ctx.rows)?;
                let mut stages = Vec::new();
                for &level in &levels[..levels.len().saturating_sub(1)] {
                    let keep = move |v: f64| v >= level;
                    let hit = move |v: f64| f64::from(u8::from(v == level));
                    stages.push(Regression::fit(ctx, response, vars, &[], Family::Logistic, Some(&keep), &hit)?);
                }
                Ok(Conditional::Ordered { levels, stages })
            }
            (Family::Logistic, ColumnKind::Continuous) => Err(EstimateError::NotBinary {
                column: response.to_string(),
                row: first_non_binary(ctx, response)?,
            }),
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, Conditional::Gaussian(_))
    }

    /// Support and probabilities at `values`; only for discrete mediators.
    pub fn distribution(&self, values: &[f64], buf: &mut Vec<f64>) -> Result<Vec<(f64, f64)>> {
        match self {
            Conditional::Bernoulli(r) => {
                let p = r.mean(values, buf)?;
                Ok(vec![(0.0, 1.0 - p), (1.0, p)])
            }
            Conditional::Ordered { levels, stages } => {
                let mut out = Vec::with_capacity(levels.len());
                let mut remaining = 1.0;
                for (k, stage) in stages.iter().enumerate() {
                    let h = stage.mean(values, buf)?;
                    out.push((levels[k], remaining * h));
                    remaining *= 1.0 - h;
                }
                out.push((*levels.last().expect("at least one level"), remaining));
                Ok(out)
            }
            Conditional::Gaussian(_) => unreachable!("continuous mediators have no finite support"),
        }
    }

    /// Conditional mean and residual standard deviation (Gaussian only).
    pub fn gaussian(&self, values: &[f64], buf: &mut Vec<f64>) -> Result<(f64, f64)> {
        match self {
            Conditional::Gaussian(r) => Ok((r.mean(values, buf)?, r.fit.sigma)),
            _ => unreachable!("not a Gaussian mediator"),
        }
    }

    /// Observed levels (discrete mediators).
    pub fn support(&self) -> Vec<f64> {
        match self {
            Conditional::Bernoulli(_) => vec![0.0, 1.0],
            Conditional::Ordered { levels, .. } => levels.clone(),
            Conditional::Gaussian(_) => Vec::new(),
        }
    }
}

fn first_non_binary(ctx: &FitContext<'_>, column: &str) -> Result<usize> {
    let col = ctx.data.column_index(column)?;
    for &r in ctx.rows {
        let v = ctx.data.value(col, r)?;
        if v != 0.0 && v != 1.0 {
            return Ok(r);
        }
    }
    Ok(ctx.rows.first().copied().unwrap_or(0))
}

/// Frequency-weighted (and optionally selection-weighted) Hajek mean of
/// `values` over the analysis rows.
pub(crate) fn hajek(values: &[f64], weights: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, w) in values.iter().zip(weights) {
        num += w * v;
        den += w;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::data::Column;

    #[test]
    fn ordered_stages_reproduce_cell_shares() {
        // Within X=0: M levels 0,1,2 with shares 1/2, 1/4, 1/4.
        // Within X=1: shares 1/4, 1/4, 1/2.
        let x = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let m = [0.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 2.0];
        let data = Dataset::new(
            vec![
                Column::dense("S", ColumnKind::Binary, &[1.0; 8]),
                Column::dense("X", ColumnKind::Binary, &x),
                Column::dense("M", ColumnKind::Categorical, &m),
            ],
            "S",
        )
        .unwrap();
        let rows: Vec<usize> = (0..8).collect();
        let ctx = FitContext {
            data: &data,
            rows: &rows,
            weights: &[1.0; 8],
            interactions: Interactions::Saturated,
            glm: &GlmOptions::default(),
        };
        let cond = Conditional::fit(&ctx, "M", &["X".to_string()], Family::Logistic).unwrap();
        let mut buf = Vec::new();
        let d0 = cond.distribution(&[0.0], &mut buf).unwrap();
        let d1 = cond.distribution(&[1.0], &mut buf).unwrap();
        for ((_, p), want) in d0.iter().zip([0.5, 0.25, 0.25]) {
            assert!((p - want).abs() < 1e-10);
        }
        for ((_, p), want) in d1.iter().zip([0.25, 0.25, 0.5]) {
            assert!((p - want).abs() < 1e-10);
        }
        assert_eq!(cond.support(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn hajek_normalises() {
        assert_eq!(hajek(&[1.0, 3.0], &[1.0, 3.0]), 2.5);
    }
}
