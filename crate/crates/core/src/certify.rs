//! Exhaustive certification of the exhaustive-optimizer agent.
//!
//! The agent's only freedom is the choice among tied optimal first actions.
//! [`certify`] explores every such choice as an AND-tree over configurations
//! `(state, elapsed steps)` and either proves that each branch enters the
//! target goal by the deadline before any other goal, or returns a concrete
//! failing branch.

use rayon::prelude::*;
use serde::Serialize;

use crate::mdp::{ActionId, DeterministicMdp, StateId, TaskSpec};
use crate::planner::{rollout, HorizonPolicy, PlannerConfig, ValueTable};
use crate::reach::highest_preference_reachable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Certified,
    Refuted,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub state: StateId,
    pub action: ActionId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub target: Option<StateId>,
    /// Distinct configurations whose optimal-action set was expanded.
    pub explored_configs: usize,
    /// Present iff refuted: the decisions of one failing tie-breaking branch.
    pub failure_path: Option<Vec<PathStep>>,
    /// Present iff not applicable.
    pub reason: Option<String>,
    pub horizon_policy: HorizonPolicy,
}

impl Certificate {
    fn not_applicable(reason: String, policy: HorizonPolicy) -> Self {
        Certificate {
            verdict: Verdict::NotApplicable,
            target: None,
            explored_configs: 0,
            failure_path: None,
            reason: Some(reason),
            horizon_policy: policy,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Certifies the agent with the default (shrinking) horizon policy.
pub fn certify(mdp: &DeterministicMdp, task: &TaskSpec) -> Certificate {
    certify_with(mdp, task, HorizonPolicy::default())
}

pub fn certify_with(mdp: &DeterministicMdp, task: &TaskSpec, policy: HorizonPolicy) -> Certificate {
    if task.horizon != task.deadline {
        return Certificate::not_applicable(
            format!(
                "certificates require horizon = deadline (horizon {}, deadline {})",
                task.horizon, task.deadline
            ),
            policy,
        );
    }
    let Some(target) = highest_preference_reachable(mdp, task) else {
        return Certificate::not_applicable(
            format!("no goal is reachable within {} steps", task.deadline),
            policy,
        );
    };

    let mut search = Search {
        mdp,
        task,
        policy,
        target,
        table: ValueTable::new(mdp, task.horizon),
        proven: vec![false; mdp.num_states() * (task.deadline + 1)],
        explored: 0,
    };
    let failure = search.explore(task.start, 0).err();
    Certificate {
        verdict: if failure.is_some() {
            Verdict::Refuted
        } else {
            Verdict::Certified
        },
        target: Some(target),
        explored_configs: search.explored,
        failure_path: failure,
        reason: None,
        horizon_policy: policy,
    }
}

struct Search<'a> {
    mdp: &'a DeterministicMdp,
    task: &'a TaskSpec,
    policy: HorizonPolicy,
    target: StateId,
    table: ValueTable,
    // proven[e * |S| + s]: every branch from (s, e) succeeds.
    proven: Vec<bool>,
    explored: usize,
}

impl Search<'_> {
    fn explore(&mut self, s: StateId, elapsed: usize) -> Result<(), Vec<PathStep>> {
        if elapsed > 0 {
            if s == self.target {
                return Ok(());
            }
            if self.task.is_goal(s) {
                return Err(Vec::new());
            }
        }
        if elapsed == self.task.deadline {
            return Err(Vec::new());
        }
        let key = elapsed * self.mdp.num_states() + s.0;
        if self.proven[key] {
            return Ok(());
        }
        self.explored += 1;
        let depth = self.policy.depth(self.task.horizon, elapsed);
        for action in self.table.first_actions(self.mdp, s, depth) {
            let next = self.mdp.successor(s, action);
            self.explore(next, elapsed + 1).map_err(|mut path| {
                path.insert(0, PathStep { state: s, action });
                path
            })?;
        }
        self.proven[key] = true;
        Ok(())
    }
}

/// The failing branch of a refuted certificate, if any.
pub fn find_counterexample(mdp: &DeterministicMdp, task: &TaskSpec) -> Option<Vec<PathStep>> {
    certify(mdp, task).failure_path
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessEstimate {
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
}

/// Monte-Carlo success frequency over `trials` rollouts seeded
/// `base_seed, base_seed + 1, ...`.
pub fn estimate_success(
    mdp: &DeterministicMdp,
    task: &TaskSpec,
    config: &PlannerConfig,
    trials: usize,
    base_seed: u64,
) -> SuccessEstimate {
    let trials = trials.max(1);
    let successes = (0..trials as u64)
        .into_par_iter()
        .filter(|&i| {
            let cfg = config.clone().with_seed(base_seed.wrapping_add(i));
            rollout(mdp, task, &cfg).success
        })
        .count();
    SuccessEstimate {
        trials,
        successes,
        frequency: successes as f64 / trials as f64,
    }
}
