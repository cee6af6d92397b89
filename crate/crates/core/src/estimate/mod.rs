//! Nuisance regressions, selection weights and effect estimators.

pub mod bootstrap;
pub mod data;
pub mod design;
pub mod glm;
pub mod mediation;
mod nuisance;
pub mod pse;
pub mod weights;

pub use bootstrap::{bootstrap_ci, bootstrap_replicates, percentile};
pub use data::{Column, ColumnKind, Dataset};
pub use design::{Design, Interactions};
pub use glm::{fit_glm, Family, GlmFit, GlmOptions};
pub use mediation::{estimate_mediation, EffectEstimate, Estimand, EstimateOptions, Mode, ModelSpec, Scale};
pub use pse::{estimate_pse, estimate_total_mean, PseSpec};
pub use weights::{selection_weights, WeightVector};
