//! Bundled fixture problems and a seeded random instance generator.
//!
//! The JSON versions of the fixtures live in `crates/core/fixtures/`.

use rand::Rng;

use crate::mdp::{DeterministicMdp, StateId, TaskSpec};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Three-state chain `A -> B -> G` with `stay`/`fwd` actions and an absorbing goal.
pub fn chain3(goal_reward: f64) -> (DeterministicMdp, TaskSpec) {
    let (a, b, g) = (StateId(0), StateId(1), StateId(2));
    let mdp = DeterministicMdp::new(
        names(&["A", "B", "G"]),
        names(&["stay", "fwd"]),
        vec![vec![a, b], vec![b, g], vec![g, g]],
        vec![0.0, 1.0, goal_reward],
        0.9,
    )
    .expect("chain3 is well formed");
    (mdp, TaskSpec::new(a, vec![g], 2))
}

/// CHAIN3 with a decoy reward of 10 on `B`.
pub fn decoy(goal_reward: f64) -> (DeterministicMdp, TaskSpec) {
    let (mdp, task) = chain3(goal_reward);
    let mdp = mdp.with_reward(StateId(1), 10.0).expect("valid reward");
    (mdp, task)
}

/// Two goals: `A -a1-> G2` directly, `A -a2-> B -a2-> G1`; `G1` is preferred.
pub fn twogoal(r1: f64, r2: f64) -> (DeterministicMdp, TaskSpec) {
    let (a, b, g1, g2) = (StateId(0), StateId(1), StateId(2), StateId(3));
    let mdp = DeterministicMdp::new(
        names(&["A", "B", "G1", "G2"]),
        names(&["a1", "a2"]),
        vec![vec![g2, b], vec![b, g1], vec![g1, g1], vec![g2, g2]],
        vec![0.0, 0.0, r1, r2],
        0.9,
    )
    .expect("twogoal is well formed");
    (mdp, TaskSpec::new(a, vec![g1, g2], 2))
}

/// Knobs for [`random_problem`].
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_deadline: usize,
    pub min_goals: usize,
    pub max_goals: usize,
    pub max_reward: f64,
    /// Probability of drawing integer rewards, which produce exact ties.
    pub integer_reward_prob: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_states: 8,
            max_actions: 4,
            max_deadline: 5,
            min_goals: 1,
            max_goals: 1,
            max_reward: 10.0,
            integer_reward_prob: 0.5,
        }
    }
}

/// Draws a random deterministic MDP with absorbing goal states.
///
/// Every non-goal transition is uniform over all states. `gamma` is drawn
/// from `{0.5, 0.8, 0.9, 0.95, 1.0}` or uniformly from `[0.3, 1]`.
pub fn random_problem<R: Rng>(rng: &mut R, spec: &RandomSpec) -> (DeterministicMdp, TaskSpec) {
    let n_goals = rng.random_range(spec.min_goals..=spec.max_goals);
    let n_states = rng.random_range((n_goals + 1).max(2)..=spec.max_states.max(n_goals + 1));
    let n_actions = rng.random_range(1..=spec.max_actions);
    let deadline = rng.random_range(1..=spec.max_deadline);

    // State 0 is the start; goals are drawn from the remaining states.
    let mut pool: Vec<usize> = (1..n_states).collect();
    let mut goals = Vec::with_capacity(n_goals);
    for _ in 0..n_goals {
        let i = rng.random_range(0..pool.len());
        goals.push(StateId(pool.swap_remove(i)));
    }

    let table = (0..n_states)
        .map(|s| {
            if goals.contains(&StateId(s)) {
                vec![StateId(s); n_actions]
            } else {
                (0..n_actions)
                    .map(|_| StateId(rng.random_range(0..n_states)))
                    .collect()
            }
        })
        .collect();

    let integer = rng.random_bool(spec.integer_reward_prob);
    let rewards = (0..n_states)
        .map(|_| {
            if integer {
                rng.random_range(0..=spec.max_reward as u32) as f64
            } else {
                rng.random_range(0.0..=spec.max_reward)
            }
        })
        .collect();

    const GAMMAS: [f64; 5] = [0.5, 0.8, 0.9, 0.95, 1.0];
    let gamma = if rng.random_bool(0.5) {
        GAMMAS[rng.random_range(0..GAMMAS.len())]
    } else {
        rng.random_range(0.3..=1.0)
    };

    let mdp = DeterministicMdp::new(
        (0..n_states).map(|i| format!("s{i}")).collect(),
        (0..n_actions).map(|i| format!("a{i}")).collect(),
        table,
        rewards,
        gamma,
    )
    .expect("generated model is well formed");
    (mdp, TaskSpec::new(StateId(0), goals, deadline))
}
