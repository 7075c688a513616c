//! Goal-reachability guarantees for receding-horizon planners on finite
//! deterministic MDPs.
//!
//! Given a model, a start state, preference-ordered goals and a deadline `J`,
//! the crate checks whether a planning agent is guaranteed to enter the best
//! reachable goal within `J` steps, computes the goal-reward lower bound that
//! makes the guarantee hold, synthesizes goal rewards, and certifies or
//! refutes the guarantee by exhaustively exploring every tie-breaking choice
//! of the agent.

pub mod certify;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod gridworld;
pub mod guarantee;
pub mod mdp;
pub mod planner;
pub mod problem;
pub mod reach;
pub mod report;
pub mod trajectory;

pub use certify::{certify, certify_with, estimate_success, find_counterexample, Certificate, SuccessEstimate, Verdict};
pub use error::{AnalysisError, ModelError, ProblemError};
pub use guarantee::{
    check_multi_goal, check_necessary_dominance, check_preference_pair, check_sufficient_single,
    goal_reward_lower_bound, synthesize_rewards, ConditionKind, ConditionResult, PreferenceMode, SynthesisResult,
};
pub use mdp::{validate, ActionId, DeterministicMdp, StateId, TaskSpec, ValidationReport};
pub use planner::{rollout, HorizonPolicy, Optimizer, PlannerConfig, RolloutRecord, TieBreak};
pub use problem::{parse_problem, read_problem, serialize_problem};
pub use reach::{forward_reachable_set, goal_reachable, highest_preference_reachable, ReachableSet};
pub use trajectory::{discounted_return, enumerate_returns, max_avoiding_return, max_containing_return, Trajectory};
