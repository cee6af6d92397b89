//! The continuous two-arm simulation with confounder-driven selection.
//!
//! `X ~ Bernoulli(0.5)`, `C ~ N(0, 1)`, `M = X + C + e_M`,
//! `Y = 0.5 X + M + 2 M X + 0.5 C + e_Y`, `logit P(S=1 | C) = beta_s C`.
//! The true NDE is 0.5 and the true NIE is 3.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::OracleError;
use crate::estimate::glm::sigmoid;
use crate::estimate::{Column, ColumnKind, Dataset};

type Result<T> = std::result::Result<T, OracleError>;

pub const TRUE_NDE: f64 = 0.5;
pub const TRUE_NIE: f64 = 3.0;

/// Name of the column marking the analysis subsample.
pub const SAMPLED: &str = "sampled";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousDgp {
    pub beta_s: f64,
    pub n0: usize,
    pub n: usize,
    pub seed: u64,
}

impl Default for ContinuousDgp {
    fn default() -> Self {
        ContinuousDgp { beta_s: 0.0, n0: 10_000, n: 1_000, seed: 1 }
    }
}

impl ContinuousDgp {
    fn validate(&self) -> Result<()> {
        if !(self.beta_s >= 0.0 && self.beta_s.is_finite()) {
            return Err(OracleError::InvalidConfig(format!("beta_s must be finite and non-negative, got {}", self.beta_s)));
        }
        if self.n == 0 || self.n > self.n0 {
            return Err(OracleError::InvalidConfig(format!("need 0 < n <= n0, got n={} n0={}", self.n, self.n0)));
        }
        Ok(())
    }
}

/// Every referred unit before any masking.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub m: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}

fn draw_population(cfg: &ContinuousDgp, rng: &mut ChaCha8Rng) -> Population {
    let mut p = Population {
        x: Vec::with_capacity(cfg.n0),
        c: Vec::with_capacity(cfg.n0),
        m: Vec::with_capacity(cfg.n0),
        y: Vec::with_capacity(cfg.n0),
        s: Vec::with_capacity(cfg.n0),
    };
    for _ in 0..cfg.n0 {
        let xi = f64::from(u8::from(rng.random::<f64>() < 0.5));
        let ci: f64 = rng.sample(StandardNormal);
        let em: f64 = rng.sample(StandardNormal);
        let ey: f64 = rng.sample(StandardNormal);
        let mi = xi + ci + em;
        let yi = 0.5 * xi + mi + 2.0 * mi * xi + 0.5 * ci + ey;
        let si = f64::from(u8::from(rng.random::<f64>() < sigmoid(cfg.beta_s * ci)));
        p.x.push(xi);
        p.c.push(ci);
        p.m.push(mi);
        p.y.push(yi);
        p.s.push(si);
    }
    p
}

/// The unmasked population `run_dgp` starts from (same seed, same draws).
pub fn population(cfg: &ContinuousDgp) -> Result<Population> {
    cfg.validate()?;
    Ok(draw_population(cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed)))
}

/// Generates `n0` referred units and marks `n` distinct selected units as
/// the analysis sample. `X` and `C` are recorded for every unit; `M` and
/// `Y` only for the analysis sample. `S` is the selection indicator of all
/// `n0` units and `sampled` flags the analysis rows.
pub fn run_dgp(cfg: &ContinuousDgp) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let Population { x, c, m, y, s } = draw_population(cfg, &mut rng);
    let selected: Vec<usize> = (0..cfg.n0).filter(|&i| s[i] == 1.0).collect();
    if selected.len() < cfg.n {
        return Err(OracleError::InsufficientSelected {
            selected: selected.len(),
            required: cfg.n,
            rate: selected.len() as f64 / cfg.n0 as f64,
        });
    }
    let mut sampled = vec![0.0; cfg.n0];
    for k in sample(&mut rng, selected.len(), cfg.n) {
        sampled[selected[k]] = 1.0;
    }
    let hidden = |v: &[f64]| -> Vec<Option<f64>> { v.iter().zip(&sampled).map(|(&a, &t)| (t == 1.0).then_some(a)).collect() };
    let columns = vec![
        Column::dense("X", ColumnKind::Binary, &x),
        Column::dense("C", ColumnKind::Continuous, &c),
        Column::new("M", ColumnKind::Continuous, hidden(&m)),
        Column::new("Y", ColumnKind::Continuous, hidden(&y)),
        Column::dense("S", ColumnKind::Binary, &s),
        Column::dense(SAMPLED, ColumnKind::Binary, &sampled),
    ];
    Ok(Dataset::new(columns, "S")?.with_subsample(SAMPLED)?)
}
