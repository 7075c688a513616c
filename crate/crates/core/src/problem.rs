//! The JSON problem file format.
//!
//! ```json
//! {
//!   "version": 1,
//!   "states": ["A", "B", "G"],
//!   "actions": ["stay", "fwd"],
//!   "transitions": [{"from": "A", "action": "stay", "to": "A"}, ...],
//!   "rewards": {"A": 0, "B": 1, "G": 3},
//!   "gamma": 0.9,
//!   "start": "A",
//!   "goals": ["G"],
//!   "deadline": 2,
//!   "horizon": 2
//! }
//! ```
//!
//! `transitions` must list every `(state, action)` pair exactly once. Goals
//! are listed in descending preference. `horizon` defaults to `deadline`.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::ProblemError;
use crate::mdp::{validate, DeterministicMdp, StateId, TaskSpec};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    version: i64,
    states: Vec<String>,
    actions: Vec<String>,
    transitions: Vec<TransitionEntry>,
    rewards: IndexMap<String, f64>,
    gamma: f64,
    start: String,
    goals: Vec<String>,
    deadline: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: String,
    action: String,
    to: String,
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<(DeterministicMdp, TaskSpec), ProblemError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| ProblemError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.version != FORMAT_VERSION {
        return Err(ProblemError::Version(file.version));
    }

    let lookup = |names: &[String], kind: &'static str, name: &str| {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ProblemError::UnknownName {
                kind,
                name: name.to_owned(),
            })
    };

    crate::mdp::check_distinct(&file.states, "state")?;
    crate::mdp::check_distinct(&file.actions, "action")?;

    let n_states = file.states.len();
    let n_actions = file.actions.len();
    let mut table: Vec<Vec<Option<StateId>>> = vec![vec![None; n_actions]; n_states];
    for t in &file.transitions {
        let s = lookup(&file.states, "state", &t.from)?;
        let a = lookup(&file.actions, "action", &t.action)?;
        let to = lookup(&file.states, "state", &t.to)?;
        if table[s][a].replace(StateId(to)).is_some() {
            return Err(ProblemError::DuplicateTransition {
                state: t.from.clone(),
                action: t.action.clone(),
            });
        }
    }
    let mut rows = Vec::with_capacity(n_states);
    for (s, row) in table.into_iter().enumerate() {
        let mut out = Vec::with_capacity(n_actions);
        for (a, next) in row.into_iter().enumerate() {
            out.push(next.ok_or_else(|| {
                ProblemError::Model(crate::error::ModelError::MissingTransition {
                    state: file.states[s].clone(),
                    action: file.actions[a].clone(),
                })
            })?);
        }
        rows.push(out);
    }

    for name in file.rewards.keys() {
        lookup(&file.states, "state", name)?;
    }
    let rewards = file
        .states
        .iter()
        .map(|s| {
            file.rewards
                .get(s)
                .copied()
                .ok_or_else(|| ProblemError::MissingReward(s.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let start = StateId(lookup(&file.states, "state", &file.start)?);
    let goals = file
        .goals
        .iter()
        .map(|g| lookup(&file.states, "state", g).map(StateId))
        .collect::<Result<Vec<_>, _>>()?;

    let mdp = DeterministicMdp::new(file.states, file.actions, rows, rewards, file.gamma)?;
    let task = TaskSpec {
        start,
        goals,
        deadline: file.deadline,
        horizon: file.horizon.unwrap_or(file.deadline),
    };
    let report = validate(&mdp, &task);
    if !report.ok {
        return Err(ProblemError::InvalidTask(report));
    }
    Ok((mdp, task))
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<(DeterministicMdp, TaskSpec), ProblemError> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

/// Renders a model and task in the problem file format (pretty-printed).
///
/// `horizon` is written only when it differs from `deadline`.
pub fn serialize_problem(mdp: &DeterministicMdp, task: &TaskSpec) -> String {
    let name = |s: StateId| mdp.state_name(s).to_owned();
    let transitions = mdp
        .states()
        .flat_map(|s| mdp.actions().map(move |a| (s, a)))
        .map(|(s, a)| TransitionEntry {
            from: name(s),
            action: mdp.action_name(a).to_owned(),
            to: name(mdp.successor(s, a)),
        })
        .collect();
    let file = ProblemFile {
        version: FORMAT_VERSION,
        states: mdp.state_names().to_vec(),
        actions: mdp.action_names().to_vec(),
        transitions,
        rewards: mdp.states().map(|s| (name(s), mdp.reward(s))).collect(),
        gamma: mdp.gamma(),
        start: name(task.start),
        goals: task.goals.iter().map(|&g| name(g)).collect(),
        deadline: task.deadline,
        horizon: (task.horizon != task.deadline).then_some(task.horizon),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("problem serializes");
    out.push('\n');
    out
}
