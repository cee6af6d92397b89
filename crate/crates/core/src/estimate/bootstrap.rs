//! Nonparametric bootstrap over whole rows, run in parallel with per-replicate streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::data::Dataset;
use crate::error::EstimateError;

type Result<T> = std::result::Result<T, EstimateError>;

/// Replicates may fail (for example on separation); more than this share
/// failing aborts the run.
pub const MAX_FAILURE_RATE: f64 = 0.10;

/// Row indices of replicate `index`. The stream depends only on
/// `(seed, index)`, so results do not depend on scheduling.
pub fn resample_indices(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Runs `estimator` on `reps` resamples of `0..n` and returns the successful
/// replicates in index order.
pub fn bootstrap_replicates<T, F>(n: usize, reps: usize, seed: u64, estimator: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[usize]) -> Result<T> + Sync,
{
    if reps == 0 {
        return Err(EstimateError::InvalidSpec("bootstrap needs at least one replicate".into()));
    }
    let outcomes: Vec<Result<T>> = (0..reps)
        .into_par_iter()
        .map(|b| estimator(&resample_indices(n, seed, b as u64)))
        .collect();
    let mut ok = Vec::with_capacity(reps);
    let mut failed = 0;
    let mut first = None;
    for o in outcomes {
        match o {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                first.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if failed as f64 > MAX_FAILURE_RATE * reps as f64 || ok.is_empty() {
        return Err(EstimateError::EstimatorFailureRate { failed, total: reps, first: first.unwrap_or_default() });
    }
    Ok(ok)
}

/// Linearly interpolated sample quantile (the common "type 7" rule).
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Two-sided percentile interval at `level` for a scalar estimator.
pub fn bootstrap_ci<F>(data: &Dataset, reps: usize, seed: u64, level: f64, estimator: F) -> Result<(f64, f64)>
where
    F: Fn(&Dataset) -> Result<f64> + Sync,
{
    if data.frequencies().is_some() {
        return Err(EstimateError::InvalidSpec("bootstrap resamples rows and cannot use frequency weights".into()));
    }
    let values = bootstrap_replicates(data.n_rows(), reps, seed, |rows| estimator(&data.take_rows(rows)))?;
    let alpha = (1.0 - level) / 2.0;
    Ok((percentile(&values, alpha), percentile(&values, 1.0 - alpha)))
}
