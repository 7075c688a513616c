//! Bootstrapped forward reachable sets.
//!
//! The set ranges over *successor* states: `R(s0, H)` holds every state that
//! can be entered at some step `1..=H`. The origin is therefore a member only
//! when it can be re-entered through a self-loop or a cycle, and `R(s0, 0)` is
//! empty.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::mdp::{DeterministicMdp, StateId, TaskSpec};

/// Earliest entry step of every state reachable from `origin` within `horizon` steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachableSet {
    pub origin: StateId,
    pub horizon: usize,
    earliest: Vec<Option<usize>>,
}

impl ReachableSet {
    /// Minimum step `t >= 1` at which `s` can be entered, if within the horizon.
    pub fn earliest_step(&self, s: StateId) -> Option<usize> {
        self.earliest.get(s.0).copied().flatten()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.earliest_step(s).is_some()
    }

    pub fn len(&self) -> usize {
        self.earliest.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members with their earliest steps, in state index order.
    pub fn iter(&self) -> impl Iterator<Item = (StateId, usize)> + '_ {
        self.earliest
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|d| (StateId(i), d)))
    }

    pub fn to_map(&self) -> BTreeMap<StateId, usize> {
        self.iter().collect()
    }
}

/// Breadth-first expansion over the transition table, depth-limited to `horizon`.
pub fn forward_reachable_set(mdp: &DeterministicMdp, origin: StateId, horizon: usize) -> ReachableSet {
    let mut earliest = vec![None; mdp.num_states()];
    // States first entered at the previous step. The origin is the frontier at
    // step 0 but is not itself recorded.
    let mut frontier = vec![origin];
    let mut expanded = vec![false; mdp.num_states()];
    for step in 1..=horizon {
        let mut next = Vec::new();
        for &s in &frontier {
            if std::mem::replace(&mut expanded[s.0], true) {
                continue;
            }
            for a in mdp.actions() {
                let t = mdp.successor(s, a);
                if earliest[t.0].is_none() {
                    earliest[t.0] = Some(step);
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    ReachableSet {
        origin,
        horizon,
        earliest,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("reachable set computed to horizon {horizon}, deadline {deadline} requested")]
pub struct HorizonTooShort {
    pub horizon: usize,
    pub deadline: usize,
}

/// First necessary condition: `goal` can be entered within `deadline` steps.
pub fn goal_reachable(reach: &ReachableSet, goal: StateId, deadline: usize) -> Result<bool, HorizonTooShort> {
    if reach.horizon < deadline {
        return Err(HorizonTooShort {
            horizon: reach.horizon,
            deadline,
        });
    }
    Ok(reach.earliest_step(goal).is_some_and(|d| d <= deadline))
}

/// The most preferred goal enterable within the task deadline.
pub fn highest_preference_reachable(mdp: &DeterministicMdp, task: &TaskSpec) -> Option<StateId> {
    let reach = forward_reachable_set(mdp, task.start, task.deadline);
    task.goals.iter().copied().find(|&g| reach.contains(g))
}
