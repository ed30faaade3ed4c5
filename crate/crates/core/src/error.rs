use thiserror::Error;

use crate::model::{Pair, QueryId, ResponseId};

/// Structural problems detected while building or loading an instance.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{0}")]
    Shape(String),
    #[error("query id {0} is out of range")]
    UnknownQuery(QueryId),
    #[error("response id {0} is out of range")]
    UnknownResponse(ResponseId),
    #[error("at most 64 responses are supported, got {0}")]
    TooManyResponses(usize),
    #[error("objective: {0}")]
    Objective(#[from] ObjectiveError),
    #[error("invalid instance json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObjectiveError {
    #[error("kappa {kappa} exceeds the number of data points {points}")]
    KappaTooLarge { kappa: u64, points: usize },
    #[error("expected {expected} per-hypothesis entries, got {got}")]
    WrongHypothesisCount { expected: usize, got: usize },
    #[error("expected {expected} per-query entries, got {got}")]
    WrongQueryCount { expected: usize, got: usize },
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("node {node} is out of range for a graph with {nodes} nodes")]
    NodeOutOfRange { node: u32, nodes: u32 },
    #[error("pair {0} is outside the instance's query/response ranges")]
    PairOutOfRange(Pair),
    #[error("cap must be positive")]
    ZeroCap,
}

/// Errors from the policy-versus-oracle run loop.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("step limit must be at least 1")]
    ZeroStepLimit,
    #[error("no termination after {steps} steps: {reason}")]
    NonTermination { steps: usize, reason: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("inconsistent oracle: the version space is empty")]
    InconsistentOracle,
}

/// Raised by a policy that cannot make progress.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("inconsistent oracle: the version space is empty")]
    EmptyVersionSpace,
    #[error("search limit: {0}")]
    Limit(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed pair {0}: unknown query or response")]
    MalformedPair(Pair),
    #[error("unknown query {0}")]
    UnknownQuery(QueryId),
    #[error("unknown hypothesis {0}")]
    UnknownHypothesis(u32),
}

/// Raised by the brute-force verifiers when an instance is too large.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SizeError {
    #[error("{what}: {actual} exceeds the configured limit {limit}")]
    TooLarge {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Size(#[from] SizeError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
