//! Exact counterfactual oracles on discrete structural models, and the
//! continuous simulation harness.

pub mod dgp;
pub mod formula;
pub mod random;
pub mod scm;
pub mod sweep;

pub use dgp::{population, run_dgp, ContinuousDgp, Population, SAMPLED, TRUE_NDE, TRUE_NIE};
pub use formula::{evaluate, pse_assignment, truncated_factorisation, Formula, FormulaArgs};
pub use random::{random_adjustment_instance, random_admg, random_separation_query, AdjustmentInstance, RandomGraphConfig};
pub use scm::{uniform_assignment, Assignment, DiscreteScm, Joint, SelectionModel, VertexModel, STATE_SPACE_LIMIT};
pub use sweep::{sweep, SweepConfig, SweepResult, SweepRow};
