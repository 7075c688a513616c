//! Reachability guarantee conditions, goal-reward bounds and reward synthesis.
//!
//! Trajectory classes are taken over *entered* states, and a "goal-free"
//! trajectory is one whose entered states are disjoint from every goal.
//!
//! | condition            | lhs                                  | rhs                                          |
//! |----------------------|--------------------------------------|----------------------------------------------|
//! | `NecessaryDominance` | best `J`-step return entering goal   | best `J`-step goal-free return               |
//! | `SufficientSingle`   | `gamma^J * r(goal)`                  | best `J`-step goal-free return (0 if none)   |
//! | `PreferencePair`     | `gamma^J * r(hi)`                    | `sum_{k<J} gamma^J r(lo)` (literal) or `sum_{k<J} gamma^k r(lo)` (corrected) |
//!
//! Every comparison is strict with no tolerance; synthesized rewards clear
//! their bounds by a multiplicative margin instead.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::AnalysisError;
use crate::mdp::{DeterministicMdp, StateId, TaskSpec};
use crate::reach::{forward_reachable_set, highest_preference_reachable};
use crate::trajectory::{max_avoiding_return, max_containing_return, Trajectory};

pub const DEFAULT_MARGIN_FACTOR: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionKind {
    Reachable,
    NecessaryDominance,
    SufficientSingle,
    PreferencePair,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionKind::Reachable => "REACHABLE",
            ConditionKind::NecessaryDominance => "NECESSARY_DOMINANCE",
            ConditionKind::SufficientSingle => "SUFFICIENT_SINGLE",
            ConditionKind::PreferencePair => "PREFERENCE_PAIR",
        })
    }
}

/// Reading of the preference-pair inequality.
///
/// `Literal` discounts every term of the lower goal's sum by `gamma^J`.
/// `Corrected` discounts the `k`-th term by `gamma^k`, which bounds a
/// trajectory that sits in the lower goal from step 1 onwards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PreferenceMode {
    Literal,
    #[default]
    Corrected,
}

impl fmt::Display for PreferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreferenceMode::Literal => "literal",
            PreferenceMode::Corrected => "corrected",
        })
    }
}

impl FromStr for PreferenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(PreferenceMode::Literal),
            "corrected" => Ok(PreferenceMode::Corrected),
            other => Err(format!("unknown preference mode {other:?}")),
        }
    }
}

/// Outcome of one condition check.
///
/// `lhs`/`rhs` are absent when the corresponding trajectory class is empty.
/// Whenever both sides are present, `holds` is exactly `margin > 0`. For
/// `Reachable`, both sides are 0 and `margin` is the number of spare steps
/// plus one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub condition: ConditionKind,
    /// The goal checked, or `[hi, lo]` for a preference pair.
    pub goals: Vec<StateId>,
    pub holds: bool,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub witness: Option<Trajectory>,
    pub counter_witness: Option<Trajectory>,
    pub interpretation: Option<PreferenceMode>,
    pub earliest_step: Option<usize>,
}

impl ConditionResult {
    fn new(condition: ConditionKind, goals: Vec<StateId>) -> Self {
        ConditionResult {
            condition,
            goals,
            holds: false,
            lhs: None,
            rhs: None,
            margin: None,
            witness: None,
            counter_witness: None,
            interpretation: None,
            earliest_step: None,
        }
    }

    fn compare(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self.margin = Some(lhs - rhs);
        self.holds = lhs > rhs;
        self
    }
}

fn discount_to_deadline(mdp: &DeterministicMdp, task: &TaskSpec) -> f64 {
    mdp.gamma().powi(task.deadline as i32)
}

fn goal_free_best(mdp: &DeterministicMdp, task: &TaskSpec) -> Option<crate::trajectory::BestTrajectory> {
    max_avoiding_return(mdp, task.start, task.deadline, &task.goals)
}

fn other_goals(task: &TaskSpec, goal: StateId) -> Vec<StateId> {
    task.goals.iter().copied().filter(|&g| g != goal).collect()
}

/// First necessary condition: `goal` can be entered within the deadline.
pub fn check_reachable(mdp: &DeterministicMdp, task: &TaskSpec, goal: StateId) -> ConditionResult {
    let reach = forward_reachable_set(mdp, task.start, task.deadline);
    let mut result = ConditionResult::new(ConditionKind::Reachable, vec![goal]);
    result.lhs = Some(0.0);
    result.rhs = Some(0.0);
    result.earliest_step = reach.earliest_step(goal);
    if let Some(step) = result.earliest_step {
        result.holds = true;
        result.margin = Some((task.deadline + 1 - step) as f64);
    }
    result
}

/// Some goal-entering trajectory strictly out-earns every goal-free one.
///
/// Goal-entering trajectories may not enter any other goal. When no
/// goal-free trajectory of the deadline length exists the comparison holds
/// vacuously (provided the goal can be entered at all).
pub fn check_necessary_dominance(mdp: &DeterministicMdp, task: &TaskSpec, goal: StateId) -> ConditionResult {
    let containing = max_containing_return(mdp, task.start, task.deadline, goal, &other_goals(task, goal));
    let free = goal_free_best(mdp, task);
    let mut result = ConditionResult::new(ConditionKind::NecessaryDominance, vec![goal]);
    result.lhs = containing.as_ref().map(|b| b.value);
    result.rhs = free.as_ref().map(|b| b.value);
    result.holds = match (result.lhs, result.rhs) {
        (Some(l), Some(r)) => {
            result.margin = Some(l - r);
            l > r
        }
        (Some(_), None) => true,
        (None, _) => false,
    };
    result.witness = containing.map(|b| b.trajectory);
    result.counter_witness = free.map(|b| b.trajectory);
    result
}

/// `gamma^J * r(goal)` strictly exceeds every goal-free return.
pub fn check_sufficient_single(mdp: &DeterministicMdp, task: &TaskSpec, goal: StateId) -> ConditionResult {
    let free = goal_free_best(mdp, task);
    let lhs = discount_to_deadline(mdp, task) * mdp.reward(goal);
    let rhs = free.as_ref().map_or(0.0, |b| b.value);
    let mut result = ConditionResult::new(ConditionKind::SufficientSingle, vec![goal]).compare(lhs, rhs);
    result.counter_witness = free.map(|b| b.trajectory);
    result
}

/// Exclusive lower bound on `r(goal)` for the sufficient condition to hold.
pub fn goal_reward_lower_bound(mdp: &DeterministicMdp, task: &TaskSpec, goal: StateId) -> Result<f64, AnalysisError> {
    let reach = forward_reachable_set(mdp, task.start, task.deadline);
    if !reach.contains(goal) {
        return Err(AnalysisError::Unreachable {
            goal: mdp.state_name(goal).to_owned(),
            deadline: task.deadline,
        });
    }
    raw_single_bound(mdp, task)
}

fn raw_single_bound(mdp: &DeterministicMdp, task: &TaskSpec) -> Result<f64, AnalysisError> {
    let rhs = goal_free_best(mdp, task).map_or(0.0, |b| b.value);
    let discount = discount_to_deadline(mdp, task);
    if discount == 0.0 {
        return Err(AnalysisError::BoundInfinite { rhs });
    }
    Ok(rhs / discount)
}

/// Right-hand side of the preference-pair inequality for a lower goal with reward `lo_reward`.
fn preference_rhs(mdp: &DeterministicMdp, deadline: usize, lo_reward: f64, mode: PreferenceMode) -> f64 {
    let gamma = mdp.gamma();
    let discount = gamma.powi(deadline as i32);
    (0..deadline)
        .map(|k| match mode {
            PreferenceMode::Literal => discount * lo_reward,
            PreferenceMode::Corrected => gamma.powi(k as i32) * lo_reward,
        })
        .sum()
}

pub fn check_preference_pair(
    mdp: &DeterministicMdp,
    task: &TaskSpec,
    hi: StateId,
    lo: StateId,
    mode: PreferenceMode,
) -> ConditionResult {
    let lhs = discount_to_deadline(mdp, task) * mdp.reward(hi);
    let rhs = preference_rhs(mdp, task.deadline, mdp.reward(lo), mode);
    let mut result = ConditionResult::new(ConditionKind::PreferencePair, vec![hi, lo]).compare(lhs, rhs);
    result.interpretation = Some(mode);
    result
}

/// Premises of the multi-goal guarantee: the sufficient condition for the
/// least-preferred goal, then every ordered preference pair `(i, j)`, `i < j`.
pub fn check_multi_goal(mdp: &DeterministicMdp, task: &TaskSpec, mode: PreferenceMode) -> Vec<ConditionResult> {
    let mut out = Vec::new();
    if let Some(last) = task.last_goal() {
        out.push(check_sufficient_single(mdp, task, last));
    }
    for (i, &hi) in task.goals.iter().enumerate() {
        for &lo in &task.goals[i + 1..] {
            out.push(check_preference_pair(mdp, task, hi, lo, mode));
        }
    }
    out
}

pub fn all_hold(results: &[ConditionResult]) -> bool {
    results.iter().all(|r| r.holds)
}

/// The full condition suite reported by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub target: Option<StateId>,
    pub results: Vec<ConditionResult>,
    pub holds: bool,
}

/// Single goal: reachability, necessary dominance and the sufficient condition.
/// Several goals: reachability of each goal, necessary dominance of the
/// best reachable goal and the multi-goal premise suite.
pub fn verify(mdp: &DeterministicMdp, task: &TaskSpec, mode: PreferenceMode) -> Verification {
    let target = highest_preference_reachable(mdp, task);
    let mut results: Vec<ConditionResult> = task.goals.iter().map(|&g| check_reachable(mdp, task, g)).collect();
    let holds = if task.goals.len() == 1 {
        let goal = task.goals[0];
        results.push(check_necessary_dominance(mdp, task, goal));
        results.push(check_sufficient_single(mdp, task, goal));
        all_hold(&results)
    } else {
        let dominance = target.map(|t| check_necessary_dominance(mdp, task, t));
        let premises = check_multi_goal(mdp, task, mode);
        let ok = dominance.as_ref().is_some_and(|d| d.holds) && all_hold(&premises);
        results.extend(dominance);
        results.extend(premises);
        ok
    };
    Verification { target, results, holds }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalAssignment {
    pub goal: StateId,
    /// Exclusive lower bound the reward clears.
    pub bound: f64,
    pub reward: f64,
    pub reachable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisResult {
    /// One entry per goal, in descending preference.
    pub assignments: Vec<GoalAssignment>,
    pub margin_factor: f64,
    pub mode: PreferenceMode,
}

impl SynthesisResult {
    pub fn reward_of(&self, goal: StateId) -> Option<f64> {
        self.assignments.iter().find(|a| a.goal == goal).map(|a| a.reward)
    }

    /// The model with synthesized goal rewards installed.
    pub fn apply(&self, mdp: &DeterministicMdp) -> Result<DeterministicMdp, AnalysisError> {
        let mut rewards = mdp.rewards().to_vec();
        for a in &self.assignments {
            rewards[a.goal.0] = a.reward;
        }
        Ok(mdp.clone().with_rewards(rewards)?)
    }
}

fn clear(bound: f64, margin_factor: f64) -> f64 {
    if bound > 0.0 {
        bound * margin_factor
    } else {
        margin_factor - 1.0
    }
}

/// Assigns goal rewards from the least-preferred goal upwards.
///
/// The least-preferred goal clears the sufficient-condition bound. Each
/// higher goal clears the larger of its preference-pair bound against the
/// next-lower goal and the sufficient-condition bound. In corrected mode it
/// additionally clears `best return of any trajectory ending in a lower goal
/// / gamma^J`, which also covers non-goal rewards collected on the way to
/// that lower goal. Goals unreachable within the deadline are still assigned
/// so that the whole preference chain is consistent.
pub fn synthesize_rewards(
    mdp: &DeterministicMdp,
    task: &TaskSpec,
    margin_factor: f64,
    mode: PreferenceMode,
) -> Result<SynthesisResult, AnalysisError> {
    if !(margin_factor > 1.0 && margin_factor.is_finite()) {
        return Err(AnalysisError::Margin(margin_factor));
    }
    if mdp.gamma() <= 0.0 {
        return Err(AnalysisError::ZeroGamma);
    }
    let reach = forward_reachable_set(mdp, task.start, task.deadline);
    if !task.goals.iter().any(|&g| reach.contains(g)) {
        return Err(AnalysisError::NoGoalReachable(task.deadline));
    }

    let discount = discount_to_deadline(mdp, task);
    let single_bound = raw_single_bound(mdp, task)?;
    let mut working = mdp.clone();
    let mut assignments = Vec::with_capacity(task.goals.len());
    let mut lower_reward: Option<f64> = None;
    for (pos, &goal) in task.goals.iter().enumerate().rev() {
        let mut bound = single_bound;
        if let Some(lo_reward) = lower_reward {
            bound = bound.max(preference_rhs(mdp, task.deadline, lo_reward, mode) / discount);
            if mode == PreferenceMode::Corrected {
                for &lo in &task.goals[pos + 1..] {
                    let others = other_goals(task, lo);
                    if let Some(best) = max_containing_return(&working, task.start, task.deadline, lo, &others) {
                        bound = bound.max(best.value / discount);
                    }
                }
            }
        }
        let reward = clear(bound, margin_factor);
        if !reward.is_finite() {
            return Err(AnalysisError::BoundInfinite { rhs: bound });
        }
        working = working.with_reward(goal, reward)?;
        lower_reward = Some(reward);
        assignments.push(GoalAssignment {
            goal,
            bound,
            reward,
            reachable: reach.contains(goal),
        });
    }
    assignments.reverse();
    Ok(SynthesisResult {
        assignments,
        margin_factor,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mdp::ActionId;

    const G: StateId = StateId(2);
    const G1: StateId = StateId(2);
    const G2: StateId = StateId(3);

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dominance_on_chain_and_decoy() {
        let (mdp, task) = fixtures::chain3(3.0);
        let r = check_necessary_dominance(&mdp, &task, G);
        assert!(r.holds);
        assert!(close(r.lhs.unwrap(), 3.7, 1e-12) && close(r.rhs.unwrap(), 1.9, 1e-12));

        let (mdp, task) = fixtures::decoy(3.0);
        let r = check_necessary_dominance(&mdp, &task, G);
        assert!(!r.holds);
        assert!(close(r.lhs.unwrap(), 12.7, 1e-12) && close(r.rhs.unwrap(), 19.0, 1e-12));
        assert_eq!(r.counter_witness.unwrap().actions, vec![ActionId(1), ActionId(0)]);

        let (mdp, task) = fixtures::chain3(3.0);
        let task = task.with_deadline(1);
        let r = check_necessary_dominance(&mdp, &task, G);
        assert!(!r.holds);
        assert_eq!(r.lhs, None);
    }

    #[test]
    fn sufficient_condition_gap() {
        let (mdp, task) = fixtures::chain3(3.0);
        let r = check_sufficient_single(&mdp, &task, G);
        assert!(r.holds);
        assert!(close(r.lhs.unwrap(), 2.43, 1e-12));

        let (mdp, task) = fixtures::chain3(2.0);
        let r = check_sufficient_single(&mdp, &task, G);
        assert!(!r.holds);
        assert!(close(r.lhs.unwrap(), 1.62, 1e-12));
        let d = check_necessary_dominance(&mdp, &task, G);
        assert!(d.holds);
        assert!(close(d.lhs.unwrap(), 2.8, 1e-12));
    }

    #[test]
    fn zero_versus_zero_fails() {
        let (mdp, task) = fixtures::twogoal(0.0, 0.0);
        let single = TaskSpec::new(task.start, vec![G2], 2);
        let r = check_sufficient_single(&mdp, &single, G2);
        assert_eq!((r.lhs, r.rhs, r.holds), (Some(0.0), Some(0.0), false));
        let p = check_preference_pair(&mdp, &task, G1, G2, PreferenceMode::Corrected);
        assert!(!p.holds);
    }

    #[test]
    fn bounds() {
        let (mdp, task) = fixtures::chain3(3.0);
        assert!(close(goal_reward_lower_bound(&mdp, &task, G).unwrap(), 2.345679012, 1e-9));
        let (mdp, task) = fixtures::twogoal(2.5, 1.0);
        assert_eq!(goal_reward_lower_bound(&mdp, &task, G2).unwrap(), 0.0);
        let (mdp, task) = fixtures::chain3(3.0);
        assert!(matches!(
            goal_reward_lower_bound(&mdp, &task.clone().with_deadline(1), G),
            Err(AnalysisError::Unreachable { .. })
        ));
        let mdp0 = mdp.with_gamma(0.0).unwrap();
        assert!(matches!(goal_reward_lower_bound(&mdp0, &task, G), Err(AnalysisError::BoundInfinite { .. })));
    }

    #[test]
    fn preference_pairs() {
        let (mdp, task) = fixtures::twogoal(2.5, 1.0);
        let r = check_preference_pair(&mdp, &task, G1, G2, PreferenceMode::Corrected);
        assert!(r.holds);
        assert!(close(r.lhs.unwrap(), 2.025, 1e-12) && close(r.rhs.unwrap(), 1.9, 1e-12));

        let (mdp, task) = fixtures::twogoal(2.1, 1.0);
        let r = check_preference_pair(&mdp, &task, G1, G2, PreferenceMode::Literal);
        assert!(r.holds);
        assert!(close(r.lhs.unwrap(), 1.701, 1e-12) && close(r.rhs.unwrap(), 1.62, 1e-12));
        assert!(!check_preference_pair(&mdp, &task, G1, G2, PreferenceMode::Corrected).holds);
    }

    #[test]
    fn multi_goal_suite() {
        let (mdp, task) = fixtures::twogoal(2.5, 1.0);
        let results = check_multi_goal(&mdp, &task, PreferenceMode::Corrected);
        assert_eq!(results.len(), 2);
        assert!(all_hold(&results));

        let (mdp, task) = fixtures::twogoal(2.5, 0.0);
        let results = check_multi_goal(&mdp, &task, PreferenceMode::Corrected);
        assert_eq!(results[0].condition, ConditionKind::SufficientSingle);
        assert!(!results[0].holds);

        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let spec = fixtures::RandomSpec {
            min_goals: 3,
            max_goals: 3,
            ..Default::default()
        };
        let (mdp, task) = fixtures::random_problem(&mut rng, &spec);
        assert_eq!(check_multi_goal(&mdp, &task, PreferenceMode::Corrected).len(), 4);
    }

    #[test]
    fn synthesis_examples() {
        let (mdp, task) = fixtures::twogoal(0.0, 0.0);
        let syn = synthesize_rewards(&mdp, &task, 1.05, PreferenceMode::Corrected).unwrap();
        assert!(close(syn.reward_of(G2).unwrap(), 0.05, 1e-12));
        let expected_g1 = (1.0 + 0.9) * 0.05 / 0.81 * 1.05;
        assert!(close(syn.reward_of(G1).unwrap(), expected_g1, 1e-12));
        assert!(close(expected_g1, 0.1231, 1e-4));
        let tuned = syn.apply(&mdp).unwrap();
        assert!(all_hold(&check_multi_goal(&tuned, &task, PreferenceMode::Corrected)));

        let (mdp, task) = fixtures::chain3(0.0);
        let syn = synthesize_rewards(&mdp, &task, 1.05, PreferenceMode::Corrected).unwrap();
        assert!(close(syn.reward_of(G).unwrap(), 2.345679012345679 * 1.05, 1e-9));
        assert!(check_sufficient_single(&syn.apply(&mdp).unwrap(), &task, G).holds);

        assert_eq!(
            synthesize_rewards(&mdp, &task, 1.0, PreferenceMode::Corrected),
            Err(AnalysisError::Margin(1.0))
        );
        assert_eq!(
            synthesize_rewards(&mdp, &task.clone().with_deadline(1), 1.05, PreferenceMode::Corrected),
            Err(AnalysisError::NoGoalReachable(1))
        );
        let mdp0 = mdp.with_gamma(0.0).unwrap();
        assert_eq!(synthesize_rewards(&mdp0, &task, 1.05, PreferenceMode::Corrected), Err(AnalysisError::ZeroGamma));
    }

    #[test]
    fn verify_suite_shapes() {
        let (mdp, task) = fixtures::chain3(3.0);
        let v = verify(&mdp, &task, PreferenceMode::Corrected);
        assert!(v.holds);
        assert_eq!(v.results.len(), 3);
        let (mdp, task) = fixtures::chain3(2.0);
        assert!(!verify(&mdp, &task, PreferenceMode::Corrected).holds);
        let (mdp, task) = fixtures::twogoal(2.5, 1.0);
        let v = verify(&mdp, &task, PreferenceMode::Corrected);
        assert!(v.holds, "{v:#?}");
        assert_eq!(v.target, Some(G1));
    }
}
