//! Deterministic MDP and task data model.
//!
//! States and actions are dense indices assigned in declaration order. The
//! reward of a state is collected when the state is *entered*; the start
//! state's own reward never contributes to a trajectory return.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::ModelError;

/// Dense index of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct StateId(pub usize);

/// Dense index of an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// A finite MDP with a total deterministic transition table.
///
/// Immutable once built; every constructor checks the model invariants
/// (totality, distinct names, non-negative finite rewards, `gamma` in `[0, 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicMdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    // Row-major: transitions[s * |A| + a].
    transitions: Vec<StateId>,
    rewards: Vec<f64>,
    gamma: f64,
}

impl DeterministicMdp {
    /// Builds a model from a row-major transition table (`table[s][a]`).
    pub fn new(
        state_names: Vec<String>,
        action_names: Vec<String>,
        table: Vec<Vec<StateId>>,
        rewards: Vec<f64>,
        gamma: f64,
    ) -> Result<Self, ModelError> {
        if state_names.is_empty() {
            return Err(ModelError::Empty("states"));
        }
        if action_names.is_empty() {
            return Err(ModelError::Empty("actions"));
        }
        check_distinct(&state_names, "state")?;
        check_distinct(&action_names, "action")?;

        let n_states = state_names.len();
        let n_actions = action_names.len();
        if table.len() != n_states {
            return Err(ModelError::TableShape {
                expected: n_states,
                found: table.len(),
            });
        }
        let mut transitions = Vec::with_capacity(n_states * n_actions);
        for (s, row) in table.into_iter().enumerate() {
            if row.len() != n_actions {
                return Err(ModelError::MissingTransition {
                    state: state_names[s].clone(),
                    action: action_names[row.len().min(n_actions - 1)].clone(),
                });
            }
            for (a, next) in row.into_iter().enumerate() {
                if next.0 >= n_states {
                    return Err(ModelError::StateOutOfRange {
                        context: format!("transition ({}, {})", state_names[s], action_names[a]),
                        index: next.0,
                    });
                }
                transitions.push(next);
            }
        }

        let mdp = DeterministicMdp {
            state_names,
            action_names,
            transitions,
            rewards: Vec::new(),
            gamma: 0.0,
        };
        mdp.with_rewards(rewards)?.with_gamma(gamma)
    }

    /// Returns a copy with a replaced reward vector.
    pub fn with_rewards(mut self, rewards: Vec<f64>) -> Result<Self, ModelError> {
        if rewards.len() != self.state_names.len() {
            return Err(ModelError::RewardCount {
                expected: self.state_names.len(),
                found: rewards.len(),
            });
        }
        for (name, &r) in self.state_names.iter().zip(&rewards) {
            if !r.is_finite() {
                return Err(ModelError::NonFiniteReward(name.clone()));
            }
            if r < 0.0 {
                return Err(ModelError::NegativeReward {
                    state: name.clone(),
                    value: r,
                });
            }
        }
        self.rewards = rewards;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(ModelError::GammaOutOfRange(gamma));
        }
        self.gamma = gamma;
        Ok(self)
    }

    /// Returns a copy with one state's reward replaced.
    pub fn with_reward(&self, state: StateId, reward: f64) -> Result<Self, ModelError> {
        let mut rewards = self.rewards.clone();
        rewards[state.0] = reward;
        self.clone().with_rewards(rewards)
    }

    /// Multiplies every reward by `factor` (must be positive and finite).
    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        let rewards = self.rewards.iter().map(|r| r * factor).collect();
        self.clone().with_rewards(rewards)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + Clone {
        (0..self.num_states()).map(StateId)
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + Clone {
        (0..self.num_actions()).map(ActionId)
    }

    /// The unique table successor of `(s, a)`.
    #[inline]
    pub fn successor(&self, s: StateId, a: ActionId) -> StateId {
        self.transitions[s.0 * self.action_names.len() + a.0]
    }

    /// Reward collected on entering `s`.
    #[inline]
    pub fn reward(&self, s: StateId) -> f64 {
        self.rewards[s.0]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.0]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_names.iter().position(|n| n == name).map(ActionId)
    }
}

pub(crate) fn check_distinct(names: &[String], kind: &'static str) -> Result<(), ModelError> {
    let mut seen = HashSet::with_capacity(names.len());
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(ModelError::DuplicateName {
                kind,
                name: n.clone(),
            });
        }
    }
    Ok(())
}

/// Start state, goals in descending preference, deadline and planning horizon.
///
/// Plain data: use [`validate`] to check it against a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSpec {
    pub start: StateId,
    pub goals: Vec<StateId>,
    pub deadline: usize,
    pub horizon: usize,
}

impl TaskSpec {
    /// Task with the default horizon (equal to the deadline).
    pub fn new(start: StateId, goals: Vec<StateId>, deadline: usize) -> Self {
        TaskSpec {
            start,
            goals,
            deadline,
            horizon: deadline,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_deadline(mut self, deadline: usize) -> Self {
        self.deadline = deadline;
        self.horizon = deadline;
        self
    }

    pub fn is_goal(&self, s: StateId) -> bool {
        self.goals.contains(&s)
    }

    /// The least-preferred goal.
    pub fn last_goal(&self) -> Option<StateId> {
        self.goals.last().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn push(&mut self, severity: Severity, message: impl Into<String>) {
        if severity == Severity::Error {
            self.ok = false;
        }
        self.issues.push(Issue {
            severity,
            message: message.into(),
        });
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }
}

/// Checks a task against its model. Errors are returned as data.
///
/// Model-level invariants are enforced when the model is built, so the
/// errors reported here concern the task. A warning is raised when a non-goal
/// state carries a positive reward at least as large as every goal reward.
pub fn validate(mdp: &DeterministicMdp, task: &TaskSpec) -> ValidationReport {
    let mut report = ValidationReport {
        ok: true,
        issues: Vec::new(),
    };
    let n = mdp.num_states();
    let name = |s: StateId| -> String {
        if s.0 < n {
            mdp.state_name(s).to_owned()
        } else {
            format!("#{}", s.0)
        }
    };

    if task.start.0 >= n {
        report.push(Severity::Error, format!("start state index {} out of range", task.start.0));
    }
    if task.goals.is_empty() {
        report.push(Severity::Error, "no goal states");
    }
    let mut seen = HashSet::new();
    for &g in &task.goals {
        if g.0 >= n {
            report.push(Severity::Error, format!("goal state index {} out of range", g.0));
            continue;
        }
        if !seen.insert(g) {
            report.push(Severity::Error, format!("duplicate goal {}", name(g)));
        }
        if g == task.start {
            report.push(Severity::Error, format!("goal equals start ({})", name(g)));
        }
    }
    if task.deadline == 0 {
        report.push(Severity::Error, "deadline must be positive");
    }
    if task.horizon == 0 {
        report.push(Severity::Error, "horizon must be positive");
    }
    if task.horizon < task.deadline {
        report.push(
            Severity::Error,
            format!("horizon {} is shorter than deadline {}", task.horizon, task.deadline),
        );
    }

    if report.ok {
        for &g in &task.goals {
            if mdp.actions().any(|a| mdp.successor(g, a) != g) {
                report.push(
                    Severity::Warning,
                    format!("goal {} is not absorbing; plans may pass through it", name(g)),
                );
            }
        }
        let best_goal = task
            .goals
            .iter()
            .map(|&g| mdp.reward(g))
            .fold(f64::NEG_INFINITY, f64::max);
        for s in mdp.states().filter(|s| !task.is_goal(*s)) {
            let r = mdp.reward(s);
            if r > 0.0 && r >= best_goal {
                report.push(
                    Severity::Warning,
                    format!(
                        "non-goal reward rivals goal reward: r({}) = {} >= best goal reward {}",
                        name(s),
                        r,
                        best_goal
                    ),
                );
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn chain3_is_clean() {
        let (mdp, task) = fixtures::chain3(3.0);
        let report = validate(&mdp, &task);
        assert!(report.ok);
        assert!(report.issues.is_empty());
    }

    #[test]
    fn decoy_reward_warns() {
        let (mdp, task) = fixtures::chain3(9999.0);
        let mdp = mdp.with_reward(StateId(1), 9999.0).unwrap();
        let report = validate(&mdp, &task);
        assert!(report.ok);
        let w: Vec<_> = report.warnings().collect();
        assert_eq!(w.len(), 1);
        assert!(w[0].message.contains("non-goal reward rivals goal reward"));
    }

    #[test]
    fn goal_equal_to_start_is_error() {
        let (mdp, _) = fixtures::chain3(3.0);
        let task = TaskSpec::new(StateId(0), vec![StateId(0)], 2);
        let report = validate(&mdp, &task);
        assert!(!report.ok);
        assert!(report.errors().any(|i| i.message.contains("goal equals start")));
    }

    #[test]
    fn short_horizon_and_duplicate_goals() {
        let (mdp, _) = fixtures::chain3(3.0);
        let task = TaskSpec::new(StateId(0), vec![StateId(2), StateId(2)], 2).with_horizon(1);
        let report = validate(&mdp, &task);
        assert_eq!(report.errors().count(), 2);
    }

    #[test]
    fn model_invariants() {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let table = vec![vec![StateId(0)], vec![StateId(1)]];
        assert!(matches!(
            DeterministicMdp::new(names(&["a", "b"]), names(&["x"]), table.clone(), vec![0.0, -1.0], 0.5),
            Err(ModelError::NegativeReward { .. })
        ));
        assert!(matches!(
            DeterministicMdp::new(names(&["a", "b"]), names(&["x"]), table.clone(), vec![0.0, 1.0], 1.5),
            Err(ModelError::GammaOutOfRange(_))
        ));
        assert!(matches!(
            DeterministicMdp::new(names(&["a", "a"]), names(&["x"]), table.clone(), vec![0.0, 1.0], 0.5),
            Err(ModelError::DuplicateName { .. })
        ));
        assert!(matches!(
            DeterministicMdp::new(names(&["a", "b"]), names(&["x"]), vec![vec![StateId(0)], vec![StateId(7)]], vec![0.0, 1.0], 0.5),
            Err(ModelError::StateOutOfRange { .. })
        ));
        let mdp = DeterministicMdp::new(names(&["a", "b"]), names(&["x"]), table, vec![0.0, 1.0], 1.0).unwrap();
        assert_eq!(mdp.successor(StateId(1), ActionId(0)), StateId(1));
        assert_eq!(mdp.successor(StateId(1), ActionId(0)), StateId(1));
    }
}
