//! Inverse probability of selection weights from externally recorded covariates.

use super::data::Dataset;
use super::design::{Design, Interactions};
use super::glm::{fit_glm, Family, GlmFit, GlmOptions};
use crate::error::EstimateError;

type Result<T> = std::result::Result<T, EstimateError>;

/// Fitted selection probabilities below this are rejected.
pub const MIN_PROPENSITY: f64 = 1e-3;

/// Weights `P(S=1) / P(S=1 | zt)` for the analysis rows.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub rows: Vec<usize>,
    pub weights: Vec<f64>,
    /// Frequency-weighted share of selected rows.
    pub p_selected: f64,
    /// `None` when `zt` is empty.
    pub fit: Option<GlmFit>,
}

impl WeightVector {
    /// Frequency-weighted mean weight over the analysis rows.
    pub fn mean(&self, data: &Dataset) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (&r, &w) in self.rows.iter().zip(&self.weights) {
            num += data.frequency(r) * w;
            den += data.frequency(r);
        }
        num / den
    }

    pub fn get(&self, position: usize) -> f64 {
        self.weights[position]
    }
}

/// Fits `S ~ zt` by logistic regression on every row and returns weights
/// for the analysis rows (in `data.analysis_rows()` order).
pub fn selection_weights(data: &Dataset, zt: &[String], interactions: Interactions, opts: &GlmOptions) -> Result<WeightVector> {
    let all: Vec<usize> = (0..data.n_rows()).collect();
    let rows = data.analysis_rows();
    if rows.is_empty() {
        return Err(EstimateError::NoRows);
    }
    data.require_complete(zt, &all)?;
    let all: Vec<usize> = all.into_iter().filter(|&r| data.frequency(r) > 0.0).collect();
    let freq: Vec<f64> = all.iter().map(|&r| data.frequency(r)).collect();
    let total: f64 = freq.iter().sum();
    let s: Vec<f64> = all.iter().map(|&r| f64::from(u8::from(data.selected(r)))).collect();
    let p_selected = s.iter().zip(&freq).map(|(a, b)| a * b).sum::<f64>() / total;
    if zt.is_empty() {
        return Ok(WeightVector { weights: vec![1.0; rows.len()], rows, p_selected, fit: None });
    }

    let design = Design::learn(data, &all, zt, interactions, &[])?;
    let x = design.matrix(data, &all)?;
    let fit = fit_glm(&x, &s, Some(&freq), Family::Logistic, design.names(), opts)?;

    let mut weights = Vec::with_capacity(rows.len());
    let mut extreme = Vec::new();
    let mut lowest = f64::INFINITY;
    for &r in &rows {
        let p = fit.mean(&design.features(&design.row_values(data, r)?)?);
        if p < MIN_PROPENSITY {
            extreme.push(r);
            lowest = lowest.min(p);
        }
        weights.push(p_selected / p);
    }
    if !extreme.is_empty() {
        return Err(EstimateError::ExtremePropensity { rows: extreme, min: lowest });
    }
    Ok(WeightVector { rows, weights, p_selected, fit: Some(fit) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::data::{Column, ColumnKind};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn independent_selection_gives_unit_weights() {
        // Each C level is selected half the time.
        let s = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let c = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let data = Dataset::new(
            vec![Column::dense("S", ColumnKind::Binary, &s), Column::dense("C", ColumnKind::Binary, &c)],
            "S",
        )
        .unwrap();
        let w = selection_weights(&data, &names(&["C"]), Interactions::None, &GlmOptions::default()).unwrap();
        assert_eq!(w.rows, vec![0, 2, 4, 6]);
        for &x in &w.weights {
            assert!((x - 1.0).abs() < 1e-9);
        }
        assert!((w.mean(&data) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saturated_weights_match_cell_shares() {
        // P(S=1)=0.5; P(S=1|C=0)=0.25, P(S=1|C=1)=0.75.
        let s = [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let c = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let data = Dataset::new(
            vec![Column::dense("S", ColumnKind::Binary, &s), Column::dense("C", ColumnKind::Binary, &c)],
            "S",
        )
        .unwrap();
        let w = selection_weights(&data, &names(&["C"]), Interactions::Saturated, &GlmOptions::default()).unwrap();
        assert!((w.weights[0] - 2.0).abs() < 1e-10);
        assert!((w.weights[1] - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn missing_external_covariate_is_rejected() {
        let data = Dataset::new(
            vec![
                Column::dense("S", ColumnKind::Binary, &[1.0, 0.0, 1.0]),
                Column::new("C", ColumnKind::Continuous, vec![Some(0.3), None, Some(0.1)]),
            ],
            "S",
        )
        .unwrap();
        let err = selection_weights(&data, &names(&["C"]), Interactions::None, &GlmOptions::default()).unwrap_err();
        assert_eq!(err, EstimateError::MissingValue { column: "C".into(), row: 1 });
    }

    #[test]
    fn empty_zt_gives_exact_ones() {
        let data = Dataset::new(vec![Column::dense("S", ColumnKind::Binary, &[1.0, 0.0, 1.0])], "S").unwrap();
        let w = selection_weights(&data, &[], Interactions::None, &GlmOptions::default()).unwrap();
        assert_eq!(w.weights, vec![1.0, 1.0]);
        assert!((w.p_selected - 2.0 / 3.0).abs() < 1e-15);
    }
}
