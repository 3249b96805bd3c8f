use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: u64 },
    #[error("line {line}: duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { line: usize, u: u64, v: u64 },
    #[error("line {line}: malformed edge line {text:?}")]
    Malformed { line: usize, text: String },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("node {0} has degree zero")]
    IsolatedNode(usize),
    #[error("invalid generator size: {0}")]
    InvalidSize(String),
    #[error("invalid walk parameters: {0}")]
    InvalidParams(String),
    #[error("unknown state: {0}")]
    UnknownState(String),
    #[error("no admissible move out of state {0}")]
    DeadEnd(String),
    #[error("dense work of {requested} entries exceeds budget {budget}")]
    Overflow { requested: usize, budget: usize },
    #[error("kernel is not irreducible")]
    NotIrreducible,
    #[error("kernel is not aperiodic (period {0})")]
    NotAperiodic(usize),
    #[error("kernel has no unique closed class ({0} closed classes)")]
    NotUnichain(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("state space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("backtrack probability is zero (alpha = 0)")]
    ZeroBacktrack,
    #[error("conditioned kernel has a negative entry at state {state} ({value:e})")]
    NegativeEntry { state: usize, value: f64 },
    #[error("cycle enumeration exceeded budget of {0} cycles")]
    BudgetExceeded(usize),
    #[error("ball of radius {radius} around node {node} contains no cycle")]
    NoCycleInBall { node: usize, radius: usize },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("target node {0} was not revisited")]
    NeverReturned(usize),
    #[error("walk trapped at {edge} after {} nodes", prefix.len())]
    Trapped { edge: String, prefix: Vec<usize> },
    #[error("measure has negative mass {value:e} at state {state}")]
    NegativeMass { state: usize, value: f64 },
}
