use thiserror::Error;

/// Errors raised by graph construction, separation queries, surgeries and
/// identification checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex name must be non-empty")]
    EmptyName,
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex `{0}` uses the reserved infix `__e__`")]
    ReservedName(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("directed part is cyclic: {}", .0.join(" -> "))]
    CycleError(Vec<String>),
    #[error("selection vertex `{0}` has an outgoing directed edge")]
    SelectionHasChildren(String),
    #[error("selection vertex `{0}` has a bidirected edge; only sink selection vertices are supported")]
    SelectionBidirected(String),
    #[error("vertex sets overlap on `{0}`")]
    OverlapError(String),
    #[error("graph has {vertices} vertices; path enumeration is limited to {limit}")]
    GraphTooLarge { vertices: usize, limit: usize },
    #[error("generated extended-node name `{0}` already exists")]
    NameCollision(String),
    #[error("graph has no selection vertex")]
    NoSelectionVertex,
    #[error("mediator set {given:?} differs from Ch(X) ∩ Pa(Y) = {expected:?}")]
    MediatorMismatch { given: Vec<String>, expected: Vec<String> },
    #[error("`{0}` is not a proper causal path")]
    NotProperPath(String),
    #[error("path set is edge inconsistent at first edge {0}")]
    EdgeInconsistent(String),
    #[error("search space of {size} candidate pairs exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
    #[error("exposure `{0}` has no proper causal path to the outcome")]
    NoCausalPath(String),
    #[error("ZT must be a subset of Z; `{0}` is not in Z")]
    ZtNotSubset(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// Errors raised while loading data, fitting models and estimating effects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("column `{column}` is missing at row {row}")]
    MissingValue { column: String, row: usize },
    #[error("column `{column}` must be binary 0/1 (row {row})")]
    NotBinary { column: String, row: usize },
    #[error("column `{column}` has a non-numeric value `{value}` at row {row}")]
    NotNumeric { column: String, row: usize, value: String },
    #[error("CSV input: {0}")]
    Csv(String),
    #[error("logistic fit did not converge after {iterations} iterations (max |score| = {max_abs_score:.3e})")]
    NonConvergence { iterations: usize, max_abs_score: f64 },
    #[error("coefficient of `{term}` reached {value:.2}; the data look separated. Coarsen the model, drop the offending term, or pass the ridge option")]
    SeparationDetected { term: String, value: f64 },
    #[error("design matrix is rank deficient (condition ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },
    #[error("fitted selection probability {min:.2e} is below 1e-3 at rows {rows:?}")]
    ExtremePropensity { rows: Vec<usize>, min: f64 },
    #[error("ratio-scale effects need a binary outcome")]
    RatioScaleRequiresBinaryOutcome,
    #[error("reference mean is {0}; ratio-scale effects are undefined")]
    DegenerateOutcome(f64),
    #[error("{failed} of {total} bootstrap replicates failed (limit 10%); first error: {first}")]
    EstimatorFailureRate { failed: usize, total: usize, first: String },
    #[error("path set is edge inconsistent at first edge {0}")]
    EdgeInconsistent(String),
    #[error("identification conditions fail: {0}")]
    IdentificationCheckFailed(String),
    #[error("{combinations} mediator value combinations exceed the limit of {limit}")]
    CombinatorialGuard { combinations: u128, limit: u128 },
    #[error("cell {0} was not observed when fitting a saturated model")]
    UnseenCell(String),
    #[error("no rows are available for fitting")]
    NoRows,
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors raised by the exact oracle and the simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("noise state space has {size} configurations; the limit is {limit}")]
    StateSpaceTooLarge { size: u128, limit: u128 },
    #[error("conditioning event has zero probability: {0}")]
    ZeroProbabilityConditioning(String),
    #[error("only {selected} rows were selected (rate {rate:.3}); {required} are needed")]
    InsufficientSelected { selected: usize, required: usize, rate: f64 },
    #[error("invalid structural model: {0}")]
    InvalidScm(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}
