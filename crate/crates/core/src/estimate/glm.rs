//! Logistic and linear regression by (iteratively re)weighted least squares.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::EstimateError;

type Result<T> = std::result::Result<T, EstimateError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Logistic,
    Linear,
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "logistic" => Ok(Family::Logistic),
            "linear" => Ok(Family::Linear),
            other => Err(format!("unknown family `{other}` (logistic|linear)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlmOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Penalty added to the non-intercept diagonal; 0 disables it.
    pub ridge: f64,
    pub coefficient_limit: f64,
}

impl Default for GlmOptions {
    fn default() -> Self {
        GlmOptions {
            tolerance: 1e-8,
            max_iterations: 100,
            ridge: 0.0,
            coefficient_limit: 15.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlmFit {
    pub family: Family,
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest absolute component of the weight-normalised score at the
    /// returned coefficients.
    pub max_abs_score: f64,
    /// Residual standard deviation (linear family only).
    pub sigma: f64,
}

impl GlmFit {
    pub fn linear_predictor(&self, features: &[f64]) -> f64 {
        self.coefficients.iter().zip(features).map(|(b, x)| b * x).sum()
    }

    /// Fitted mean for one feature row.
    pub fn mean(&self, features: &[f64]) -> f64 {
        let eta = self.linear_predictor(features);
        match self.family {
            Family::Logistic => sigmoid(eta),
            Family::Linear => eta,
        }
    }

    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.terms.iter().position(|t| t == term).map(|i| self.coefficients[i])
    }
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Fits `response ~ design` with optional non-negative case weights.
pub fn fit_glm(
    design: &DMatrix<f64>,
    response: &[f64],
    weights: Option<&[f64]>,
    family: Family,
    terms: &[String],
    opts: &GlmOptions,
) -> Result<GlmFit> {
    let (n, p) = design.shape();
    if n == 0 {
        return Err(EstimateError::NoRows);
    }
    assert_eq!(response.len(), n, "response length");
    assert_eq!(terms.len(), p, "one name per design column");
    let w: Vec<f64> = weights.map_or_else(|| vec![1.0; n], <[f64]>::to_vec);
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(EstimateError::NoRows);
    }
    if family == Family::Logistic {
        if let Some(row) = response.iter().position(|&y| y != 0.0 && y != 1.0) {
            return Err(EstimateError::NotBinary { column: "response".into(), row });
        }
    }
    let y = DVector::from_column_slice(response);
    let penalty = |h: &mut DMatrix<f64>| {
        for j in 1..p {
            h[(j, j)] += opts.ridge;
        }
    };

    let gram = |cw: &[f64]| -> DMatrix<f64> {
        let mut xw = design.clone();
        for (i, mut row) in xw.row_iter_mut().enumerate() {
            row *= cw[i].sqrt();
        }
        xw.transpose() * xw
    };
    let xt_weighted = |v: &DVector<f64>| -> DVector<f64> {
        let scaled = DVector::from_iterator(n, v.iter().zip(&w).map(|(a, b)| a * b));
        design.transpose() * scaled
    };

    if opts.ridge == 0.0 {
        check_rank(&gram(&w))?;
    }

    match family {
        Family::Linear => {
            let mut h = gram(&w);
            penalty(&mut h);
            let beta = solve(h, xt_weighted(&y))?;
            let resid = &y - design * &beta;
            let score = score_of(&xt_weighted(&resid), &beta, opts.ridge, total);
            let rss: f64 = resid.iter().zip(&w).map(|(r, wi)| wi * r * r).sum();
            let dof = if total > p as f64 { total - p as f64 } else { total };
            let fit = GlmFit {
                family,
                terms: terms.to_vec(),
                coefficients: beta.iter().copied().collect(),
                converged: true,
                iterations: 1,
                max_abs_score: score,
                sigma: (rss / dof).sqrt(),
            };
            check_limits(&fit, opts)?;
            Ok(fit)
        }
        Family::Logistic => {
            let ybar: f64 = response.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
            let mut beta = DVector::zeros(p);
            beta[0] = (ybar.clamp(1e-6, 1.0 - 1e-6) / (1.0 - ybar.clamp(1e-6, 1.0 - 1e-6))).ln();
            let mut iterations = 0;
            let mut polished = false;
            loop {
                let eta = design * &beta;
                let mu = eta.map(sigmoid);
                let resid = &y - &mu;
                let grad = xt_weighted(&resid);
                let score = score_of(&grad, &beta, opts.ridge, total);
                if score <= opts.tolerance {
                    // One more Newton step from inside the quadratic basin costs
                    // little and takes exact-distribution fits to rounding level.
                    if !polished {
                        polished = true;
                        let cw: Vec<f64> = mu.iter().zip(&w).map(|(m, wi)| wi * m * (1.0 - m)).collect();
                        let mut h = gram(&cw);
                        penalty(&mut h);
                        let mut rhs = grad;
                        for j in 1..p {
                            rhs[j] -= opts.ridge * beta[j];
                        }
                        let candidate = &beta + solve(h, rhs)?;
                        let mu_c = (design * &candidate).map(sigmoid);
                        let score_c = score_of(&xt_weighted(&(&y - mu_c)), &candidate, opts.ridge, total);
                        if score_c < score {
                            beta = candidate;
                            continue;
                        }
                    }
                    return Ok(GlmFit {
                        family,
                        terms: terms.to_vec(),
                        coefficients: beta.iter().copied().collect(),
                        converged: true,
                        iterations,
                        max_abs_score: score,
                        sigma: f64::NAN,
                    });
                }
                if iterations == opts.max_iterations {
                    return Err(EstimateError::NonConvergence { iterations, max_abs_score: score });
                }
                iterations += 1;
                let cw: Vec<f64> = mu.iter().zip(&w).map(|(m, wi)| wi * m * (1.0 - m)).collect();
                let mut h = gram(&cw);
                penalty(&mut h);
                let mut rhs = grad;
                for j in 1..p {
                    rhs[j] -= opts.ridge * beta[j];
                }
                beta += solve(h, rhs)?;
                let probe = GlmFit {
                    family,
                    terms: terms.to_vec(),
                    coefficients: beta.iter().copied().collect(),
                    converged: false,
                    iterations,
                    max_abs_score: score,
                    sigma: f64::NAN,
                };
                check_limits(&probe, opts)?;
            }
        }
    }
}

fn score_of(grad: &DVector<f64>, beta: &DVector<f64>, ridge: f64, total: f64) -> f64 {
    grad.iter()
        .enumerate()
        .map(|(j, g)| if j == 0 { *g } else { g - ridge * beta[j] })
        .map(|g| (g / total).abs())
        .fold(0.0, f64::max)
}

fn check_limits(fit: &GlmFit, opts: &GlmOptions) -> Result<()> {
    for (term, &b) in fit.terms.iter().zip(&fit.coefficients) {
        if !b.is_finite() || b.abs() > opts.coefficient_limit {
            return Err(EstimateError::SeparationDetected { term: term.clone(), value: b });
        }
    }
    Ok(())
}

fn check_rank(h: &DMatrix<f64>) -> Result<()> {
    let eig = SymmetricEigen::new(h.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio < 1e-12 {
        return Err(EstimateError::RankDeficient { ratio });
    }
    Ok(())
}

fn solve(h: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    match h.clone().cholesky() {
        Some(ch) => Ok(ch.solve(&rhs)),
        None => h
            .lu()
            .solve(&rhs)
            .ok_or(EstimateError::RankDeficient { ratio: 0.0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("b{j}")).collect()
    }

    #[test]
    fn balanced_null_regressor_gives_zero_slope() {
        // x alternates 0/1 and y has the same 0/1 mix within each x group.
        let x: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        let y: Vec<f64> = (0..40).map(|i| f64::from(u8::from((i / 2) % 4 == 0))).collect();
        let mut d = DMatrix::zeros(40, 2);
        for i in 0..40 {
            d[(i, 0)] = 1.0;
            d[(i, 1)] = x[i];
        }
        let fit = fit_glm(&d, &y, None, Family::Logistic, &names(2), &GlmOptions::default()).unwrap();
        let mean = y.iter().sum::<f64>() / 40.0;
        assert!(fit.coefficients[1].abs() < 1e-6);
        assert!((fit.coefficients[0] - (mean / (1.0 - mean)).ln()).abs() < 1e-6);
        assert!(fit.converged && fit.max_abs_score <= 1e-8);
    }

    #[test]
    fn recovers_logistic_slope_at_large_n() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut d = DMatrix::zeros(n, 2);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let c: f64 = rng.sample(StandardNormal);
            d[(i, 0)] = 1.0;
            d[(i, 1)] = c;
            y[i] = f64::from(u8::from(rng.random::<f64>() < sigmoid(c)));
        }
        let fit = fit_glm(&d, &y, None, Family::Logistic, &names(2), &GlmOptions::default()).unwrap();
        assert!((fit.coefficients[1] - 1.0).abs() < 0.05, "{:?}", fit.coefficients);
    }

    #[test]
    fn separated_data_is_an_error() {
        let mut d = DMatrix::zeros(20, 2);
        let mut y = vec![0.0; 20];
        for i in 0..20 {
            d[(i, 0)] = 1.0;
            d[(i, 1)] = i as f64 - 9.5;
            y[i] = f64::from(u8::from(i >= 10));
        }
        let err = fit_glm(&d, &y, None, Family::Logistic, &names(2), &GlmOptions::default()).unwrap_err();
        assert!(matches!(err, EstimateError::SeparationDetected { .. }), "{err:?}");
        let ridge = GlmOptions { ridge: 1e-6, ..Default::default() };
        assert!(fit_glm(&d, &y, None, Family::Logistic, &names(2), &ridge).is_err());
    }

    #[test]
    fn collinear_design_is_rank_deficient() {
        let mut d = DMatrix::zeros(10, 3);
        for i in 0..10 {
            d[(i, 0)] = 1.0;
            d[(i, 1)] = i as f64;
            d[(i, 2)] = 2.0 * i as f64;
        }
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let err = fit_glm(&d, &y, None, Family::Linear, &names(3), &GlmOptions::default()).unwrap_err();
        assert!(matches!(err, EstimateError::RankDeficient { .. }));
    }

    #[test]
    fn weighted_linear_fit_matches_replication() {
        let d = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let y = [1.0, 2.0, 4.0];
        let w = [1.0, 2.0, 1.0];
        let fit = fit_glm(&d, &y, Some(&w), Family::Linear, &names(2), &GlmOptions::default()).unwrap();
        let d2 = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
        let y2 = [1.0, 2.0, 2.0, 4.0];
        let fit2 = fit_glm(&d2, &y2, None, Family::Linear, &names(2), &GlmOptions::default()).unwrap();
        for (a, b) in fit.coefficients.iter().zip(&fit2.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(fit.max_abs_score < 1e-12);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }
}
