use thiserror::Error;

use crate::mdp::ValidationReport;

/// Violations of the model invariants, raised while building a [`crate::DeterministicMdp`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model has no {0}")]
    Empty(&'static str),
    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("transition table has {found} rows, expected {expected}")]
    TableShape { expected: usize, found: usize },
    #[error("missing transition ({state}, {action})")]
    MissingTransition { state: String, action: String },
    #[error("{context}: state index {index} out of range")]
    StateOutOfRange { context: String, index: usize },
    #[error("expected {expected} rewards, found {found}")]
    RewardCount { expected: usize, found: usize },
    #[error("negative reward {value} for state {state}")]
    NegativeReward { state: String, value: f64 },
    #[error("non-finite reward for state {0}")]
    NonFiniteReward(String),
    #[error("gamma {0} outside [0, 1]")]
    GammaOutOfRange(f64),
}

/// Errors from reading a problem file.
#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported problem version {0} (expected 1)")]
    Version(i64),
    #[error("unknown {kind} name {name:?}")]
    UnknownName { kind: &'static str, name: String },
    #[error("duplicate transition ({state}, {action})")]
    DuplicateTransition { state: String, action: String },
    #[error("missing reward for state {0}")]
    MissingReward(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid task: {}", summarize(.0))]
    InvalidTask(ValidationReport),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn summarize(report: &ValidationReport) -> String {
    report
        .errors()
        .map(|i| i.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Errors from the analysis routines (bounds, synthesis, enumeration).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("enumeration cap exceeded: {actions}^{length} sequences > cap {cap}")]
    CapExceeded {
        actions: usize,
        length: usize,
        cap: u64,
    },
    #[error("bound infinite: gamma is 0 and goal-free trajectories earn {rhs}")]
    BoundInfinite { rhs: f64 },
    #[error("condition 1 fails: goal {goal} is not reachable within {deadline} steps")]
    Unreachable { goal: String, deadline: usize },
    #[error("no goal is reachable within {0} steps")]
    NoGoalReachable(usize),
    #[error("gamma must be positive for reward synthesis")]
    ZeroGamma,
    #[error("margin must exceed 1 (got {0})")]
    Margin(f64),
    #[error("{0} is not a goal of the task")]
    NotAGoal(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
