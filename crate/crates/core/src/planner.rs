//! Receding-horizon planning agent.
//!
//! At every step the agent scores action sequences on the (exact) model,
//! executes the first action of a best sequence and re-plans. Two
//! optimizers are provided: an exhaustive one backed by a value table, and
//! random shooting.
//!
//! Randomness comes from `ChaCha8Rng` seeded with `seed_from_u64`, which is
//! specified independently of platform and word size, so a recorded seed
//! replays identically everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::mdp::{ActionId, DeterministicMdp, StateId, TaskSpec};
use crate::reach::highest_preference_reachable;
use crate::trajectory::returns_of_states;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Exhaustive,
    RandomShooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    Random,
    LowestIndex,
}

/// How the planning depth evolves as steps elapse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonPolicy {
    /// Plan `H - elapsed` steps, so no plan looks past step `H` of the episode.
    #[default]
    Shrinking,
    /// Plan `H` steps at every re-plan.
    Fixed,
}

impl HorizonPolicy {
    /// Planning depth after `elapsed` executed steps (never below 1).
    pub fn depth(self, horizon: usize, elapsed: usize) -> usize {
        match self {
            HorizonPolicy::Fixed => horizon.max(1),
            HorizonPolicy::Shrinking => horizon.saturating_sub(elapsed).max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannerConfig {
    pub optimizer: Optimizer,
    pub horizon: usize,
    pub tie_break: TieBreak,
    pub shooting_samples: usize,
    pub seed: u64,
    pub horizon_policy: HorizonPolicy,
}

impl PlannerConfig {
    pub fn exhaustive(horizon: usize, tie_break: TieBreak) -> Self {
        PlannerConfig {
            optimizer: Optimizer::Exhaustive,
            horizon,
            tie_break,
            shooting_samples: 1,
            seed: 0,
            horizon_policy: HorizonPolicy::default(),
        }
    }

    pub fn random_shooting(horizon: usize, samples: usize) -> Self {
        PlannerConfig {
            optimizer: Optimizer::RandomShooting,
            horizon,
            tie_break: TieBreak::LowestIndex,
            shooting_samples: samples.max(1),
            seed: 0,
            horizon_policy: HorizonPolicy::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon_policy(mut self, policy: HorizonPolicy) -> Self {
        self.horizon_policy = policy;
        self
    }
}

/// Optimal `d`-step values `V_d(s)` for every state and every `d <= max_depth`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    values: Vec<Vec<f64>>,
}

impl ValueTable {
    pub fn new(mdp: &DeterministicMdp, max_depth: usize) -> Self {
        let gamma = mdp.gamma();
        let mut values = Vec::with_capacity(max_depth + 1);
        values.push(vec![0.0; mdp.num_states()]);
        for d in 1..=max_depth {
            let prev: &Vec<f64> = &values[d - 1];
            let row = mdp
                .states()
                .map(|s| {
                    mdp.actions()
                        .map(|a| {
                            let t = mdp.successor(s, a);
                            mdp.reward(t) + gamma * prev[t.0]
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            values.push(row);
        }
        ValueTable { values }
    }

    pub fn max_depth(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, s: StateId, depth: usize) -> f64 {
        self.values[depth][s.0]
    }

    /// Q-value of taking `a` in `s` with `depth` steps to go (`depth >= 1`).
    pub fn action_value(&self, mdp: &DeterministicMdp, s: StateId, a: ActionId, depth: usize) -> f64 {
        let t = mdp.successor(s, a);
        mdp.reward(t) + mdp.gamma() * self.values[depth - 1][t.0]
    }

    /// Actions whose value equals the optimum exactly, ascending.
    pub fn first_actions(&self, mdp: &DeterministicMdp, s: StateId, depth: usize) -> Vec<ActionId> {
        let best = self.value(s, depth);
        mdp.actions()
            .filter(|&a| self.action_value(mdp, s, a, depth) == best)
            .collect()
    }
}

pub fn optimal_value(mdp: &DeterministicMdp, s: StateId, depth: usize) -> f64 {
    ValueTable::new(mdp, depth).value(s, depth)
}

/// First actions of every optimal `depth`-step plan from `s`.
pub fn optimal_first_actions(mdp: &DeterministicMdp, s: StateId, depth: usize) -> Vec<ActionId> {
    assert!(depth >= 1, "planning depth must be positive");
    ValueTable::new(mdp, depth).first_actions(mdp, s, depth)
}

/// A planner bound to one model and configuration, owning its RNG stream.
pub struct Planner<'a> {
    mdp: &'a DeterministicMdp,
    config: PlannerConfig,
    table: Option<ValueTable>,
    rng: ChaCha8Rng,
}

impl<'a> Planner<'a> {
    pub fn new(mdp: &'a DeterministicMdp, config: PlannerConfig) -> Self {
        let table = match config.optimizer {
            Optimizer::Exhaustive => Some(ValueTable::new(mdp, config.horizon.max(1))),
            Optimizer::RandomShooting => None,
        };
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Planner {
            mdp,
            config,
            table,
            rng,
        }
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    /// Chooses the action to execute in `s` after `elapsed` executed steps.
    pub fn plan_step(&mut self, s: StateId, elapsed: usize) -> ActionId {
        let depth = self.config.horizon_policy.depth(self.config.horizon, elapsed);
        match &self.table {
            Some(table) => {
                let best = table.first_actions(self.mdp, s, depth);
                match self.config.tie_break {
                    TieBreak::LowestIndex => best[0],
                    TieBreak::Random => best[self.rng.random_range(0..best.len())],
                }
            }
            None => self.shoot(s, depth),
        }
    }

    fn shoot(&mut self, s: StateId, depth: usize) -> ActionId {
        let n = self.mdp.num_actions();
        let mut best: Option<(f64, ActionId)> = None;
        let mut states = Vec::with_capacity(depth);
        for _ in 0..self.config.shooting_samples {
            states.clear();
            let mut cur = s;
            let mut first = ActionId(0);
            for k in 0..depth {
                let a = ActionId(self.rng.random_range(0..n));
                if k == 0 {
                    first = a;
                }
                cur = self.mdp.successor(cur, a);
                states.push(cur);
            }
            let value = returns_of_states(self.mdp, &states);
            if best.is_none_or(|(b, _)| value > b) {
                best = Some((value, first));
            }
        }
        best.expect("at least one sample").1
    }
}

/// Single decision from `s` with a fresh planner (elapsed = 0).
pub fn plan_step(mdp: &DeterministicMdp, s: StateId, config: &PlannerConfig) -> ActionId {
    Planner::new(mdp, config.clone()).plan_step(s, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GoalHit {
    pub state: StateId,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RolloutRecord {
    pub target: Option<StateId>,
    /// Executed states `s_1..s_T`.
    pub visited: Vec<StateId>,
    pub actions: Vec<ActionId>,
    pub first_goal_hit: Option<GoalHit>,
    pub success: bool,
    pub seed: u64,
}

/// Runs the agent for at most `deadline` steps, stopping on entering any goal.
///
/// Success means the first goal entered is the highest-preference goal
/// reachable within the deadline.
pub fn rollout(mdp: &DeterministicMdp, task: &TaskSpec, config: &PlannerConfig) -> RolloutRecord {
    let target = highest_preference_reachable(mdp, task);
    let mut planner = Planner::new(mdp, config.clone());
    let mut visited = Vec::with_capacity(task.deadline);
    let mut actions = Vec::with_capacity(task.deadline);
    let mut first_goal_hit = None;
    let mut s = task.start;
    for step in 1..=task.deadline {
        let a = planner.plan_step(s, step - 1);
        s = mdp.successor(s, a);
        actions.push(a);
        visited.push(s);
        if task.is_goal(s) {
            first_goal_hit = Some(GoalHit { state: s, step });
            break;
        }
    }
    let success = match (target, first_goal_hit) {
        (Some(t), Some(hit)) => hit.state == t && hit.step <= task.deadline,
        _ => false,
    };
    RolloutRecord {
        target,
        visited,
        actions,
        first_goal_hit,
        success,
        seed: config.seed,
    }
}
