//! Identification and estimation of mediation and path-specific effects
//! under sample selection.

pub mod criteria;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod oracle;
pub mod separation;
pub mod surgery;

pub use error::GraphError;
pub use graph::{Admg, AdmgBuilder, GraphSpec, Mark, Path, PathSetPi, Vertex, VertexSet};
