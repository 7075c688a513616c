//! Trajectories, discounted returns and extremal returns over trajectory classes.
//!
//! A trajectory of length `L` from `origin` enters states `s_1..s_L`; the
//! `k`-th entered state is discounted by `gamma^(k-1)`. Returns are always
//! evaluated back to front (`v = r(s_k) + gamma * v`), the same association
//! the dynamic programs use, so DP maxima and enumerated maxima agree bit for
//! bit.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::AnalysisError;
use crate::mdp::{ActionId, DeterministicMdp, StateId};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Trajectory {
    pub origin: StateId,
    pub actions: Vec<ActionId>,
    /// Entered states; `states[k]` is entered by `actions[k]`.
    pub states: Vec<StateId>,
}

impl Trajectory {
    pub fn from_actions(mdp: &DeterministicMdp, origin: StateId, actions: Vec<ActionId>) -> Self {
        let mut states = Vec::with_capacity(actions.len());
        let mut s = origin;
        for &a in &actions {
            s = successor(mdp, s, a);
            states.push(s);
        }
        Trajectory {
            origin,
            actions,
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn enters(&self, s: StateId) -> bool {
        self.states.contains(&s)
    }

    /// 1-based step at which `s` is first entered.
    pub fn first_entry(&self, s: StateId) -> Option<usize> {
        self.states.iter().position(|&x| x == s).map(|i| i + 1)
    }

    /// `A -fwd-> B -stay-> B` style rendering.
    pub fn describe(&self, mdp: &DeterministicMdp) -> String {
        let mut out = mdp.state_name(self.origin).to_owned();
        for (a, s) in self.actions.iter().zip(&self.states) {
            out.push_str(&format!(" -{}-> {}", mdp.action_name(*a), mdp.state_name(*s)));
        }
        out
    }
}

#[inline]
pub fn successor(mdp: &DeterministicMdp, s: StateId, a: ActionId) -> StateId {
    mdp.successor(s, a)
}

/// `sum_k gamma^(k-1) * r(s_k)` over the entered states.
pub fn discounted_return(mdp: &DeterministicMdp, traj: &Trajectory) -> f64 {
    returns_of_states(mdp, &traj.states)
}

pub(crate) fn returns_of_states(mdp: &DeterministicMdp, states: &[StateId]) -> f64 {
    let gamma = mdp.gamma();
    states
        .iter()
        .rev()
        .fold(0.0, |acc, &s| mdp.reward(s) + gamma * acc)
}

/// One exhaustively enumerated action sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedReturn {
    pub actions: Vec<ActionId>,
    pub value: f64,
    /// Distinct entered states.
    pub contains: BTreeSet<StateId>,
}

/// Every action sequence of exactly `length` steps, in lexicographic order.
pub fn enumerate_returns(
    mdp: &DeterministicMdp,
    origin: StateId,
    length: usize,
    cap: u64,
) -> Result<Vec<EnumeratedReturn>, AnalysisError> {
    let n = mdp.num_actions();
    let count = (n as u64)
        .checked_pow(length as u32)
        .filter(|&c| c <= cap)
        .ok_or(AnalysisError::CapExceeded {
            actions: n,
            length,
            cap,
        })?;

    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; length];
    let mut states = Vec::with_capacity(length);
    for _ in 0..count {
        states.clear();
        let mut s = origin;
        for &d in &digits {
            s = mdp.successor(s, ActionId(d));
            states.push(s);
        }
        out.push(EnumeratedReturn {
            actions: digits.iter().map(|&d| ActionId(d)).collect(),
            value: returns_of_states(mdp, &states),
            contains: states.iter().copied().collect(),
        });
        // Odometer increment, last action fastest.
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// A maximizing trajectory and its return.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestTrajectory {
    pub value: f64,
    pub trajectory: Trajectory,
}

fn mask(mdp: &DeterministicMdp, set: &[StateId]) -> Vec<bool> {
    let mut m = vec![false; mdp.num_states()];
    for s in set {
        m[s.0] = true;
    }
    m
}

/// Best return over trajectories of exactly `length` steps whose entered
/// states avoid `avoid`. Ties in the witness go to the lowest action index.
pub fn max_avoiding_return(
    mdp: &DeterministicMdp,
    origin: StateId,
    length: usize,
    avoid: &[StateId],
) -> Option<BestTrajectory> {
    let blocked = mask(mdp, avoid);
    let n = mdp.num_states();
    let gamma = mdp.gamma();

    // table[d][s]: best d-step return from s, None when infeasible.
    let mut table: Vec<Vec<Option<f64>>> = Vec::with_capacity(length + 1);
    table.push(vec![Some(0.0); n]);
    for d in 1..=length {
        let prev = &table[d - 1];
        let row = mdp
            .states()
            .map(|s| {
                mdp.actions()
                    .filter_map(|a| {
                        let t = mdp.successor(s, a);
                        if blocked[t.0] {
                            return None;
                        }
                        prev[t.0].map(|v| mdp.reward(t) + gamma * v)
                    })
                    .fold(None, max_opt)
            })
            .collect();
        table.push(row);
    }

    let value = table[length][origin.0]?;
    let mut actions = Vec::with_capacity(length);
    let mut s = origin;
    for d in (1..=length).rev() {
        let target = table[d][s.0].expect("feasible along the witness");
        let a = mdp
            .actions()
            .find(|&a| {
                let t = mdp.successor(s, a);
                !blocked[t.0] && table[d - 1][t.0].map(|v| mdp.reward(t) + gamma * v) == Some(target)
            })
            .expect("argmax exists");
        actions.push(a);
        s = mdp.successor(s, a);
    }
    Some(BestTrajectory {
        value,
        trajectory: Trajectory::from_actions(mdp, origin, actions),
    })
}

/// Best return over trajectories of exactly `length` steps that enter
/// `target` at least once and never enter `avoid`.
pub fn max_containing_return(
    mdp: &DeterministicMdp,
    origin: StateId,
    length: usize,
    target: StateId,
    avoid: &[StateId],
) -> Option<BestTrajectory> {
    let blocked = mask(mdp, avoid);
    if blocked[target.0] {
        return None;
    }
    let n = mdp.num_states();
    let gamma = mdp.gamma();

    // table[d][s][seen]: best d-step return from s, where `seen` records
    // whether the target has already been entered.
    let mut table: Vec<Vec<[Option<f64>; 2]>> = Vec::with_capacity(length + 1);
    table.push(vec![[None, Some(0.0)]; n]);
    let step = |prev: &[[Option<f64>; 2]], s: StateId, seen: usize, a: ActionId| -> Option<f64> {
        let t = mdp.successor(s, a);
        if blocked[t.0] {
            return None;
        }
        let seen_next = if t == target { 1 } else { seen };
        prev[t.0][seen_next].map(|v| mdp.reward(t) + gamma * v)
    };
    for d in 1..=length {
        let prev = &table[d - 1];
        let row = mdp
            .states()
            .map(|s| {
                let best = |seen| mdp.actions().filter_map(|a| step(prev, s, seen, a)).fold(None, max_opt);
                [best(0), best(1)]
            })
            .collect();
        table.push(row);
    }

    let value = table[length][origin.0][0]?;
    let mut actions = Vec::with_capacity(length);
    let mut s = origin;
    let mut seen = 0;
    for d in (1..=length).rev() {
        let want = table[d][s.0][seen];
        let a = mdp
            .actions()
            .find(|&a| step(&table[d - 1], s, seen, a) == want)
            .expect("argmax exists");
        actions.push(a);
        s = mdp.successor(s, a);
        if s == target {
            seen = 1;
        }
    }
    Some(BestTrajectory {
        value,
        trajectory: Trajectory::from_actions(mdp, origin, actions),
    })
}

// First maximum wins on ties.
fn max_opt(best: Option<f64>, v: f64) -> Option<f64> {
    match best {
        Some(b) if b >= v => Some(b),
        _ => Some(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const A: StateId = StateId(0);
    const B: StateId = StateId(1);
    const G: StateId = StateId(2);
    const STAY: ActionId = ActionId(0);
    const FWD: ActionId = ActionId(1);

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn successors() {
        let (mdp, _) = fixtures::chain3(3.0);
        assert_eq!(successor(&mdp, A, FWD), B);
        assert_eq!(successor(&mdp, G, FWD), G);
        assert_eq!(successor(&mdp, A, STAY), A);
    }

    #[test]
    fn chain3_returns() {
        let (mdp, _) = fixtures::chain3(3.0);
        let r = |acts: Vec<ActionId>| discounted_return(&mdp, &Trajectory::from_actions(&mdp, A, acts));
        assert!(close(r(vec![FWD, FWD]), 3.7));
        assert!(close(r(vec![FWD, STAY]), 1.9));
        assert_eq!(r(vec![STAY, STAY]), 0.0);
    }

    #[test]
    fn chain3_enumeration() {
        let (mdp, _) = fixtures::chain3(3.0);
        let all = enumerate_returns(&mdp, A, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let expected = [
            (vec![STAY, STAY], 0.0),
            (vec![STAY, FWD], 0.9),
            (vec![FWD, STAY], 1.9),
            (vec![FWD, FWD], 3.7),
        ];
        assert_eq!(all.len(), 4);
        for (e, (acts, v)) in all.iter().zip(expected) {
            assert_eq!(e.actions, acts);
            assert!(close(e.value, v), "{} vs {}", e.value, v);
        }
        assert_eq!(all[3].contains, BTreeSet::from([B, G]));

        let one = enumerate_returns(&mdp, A, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(one.iter().map(|e| e.value).collect::<Vec<_>>(), vec![0.0, 1.0]);
    }

    #[test]
    fn enumeration_cap() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let spec = fixtures::RandomSpec {
            max_actions: 4,
            ..Default::default()
        };
        let (mdp, task) = loop {
            let p = fixtures::random_problem(&mut rng, &spec);
            if p.0.num_actions() == 4 {
                break p;
            }
        };
        assert!(matches!(
            enumerate_returns(&mdp, task.start, 11, DEFAULT_ENUMERATION_CAP),
            Err(AnalysisError::CapExceeded { actions: 4, length: 11, .. })
        ));
    }

    #[test]
    fn avoiding_maxima() {
        let (mdp, _) = fixtures::chain3(3.0);
        let best = max_avoiding_return(&mdp, A, 2, &[G]).unwrap();
        assert!(close(best.value, 1.9));
        assert_eq!(best.trajectory.actions, vec![FWD, STAY]);

        let (mdp, _) = fixtures::twogoal(2.5, 1.0);
        let best = max_avoiding_return(&mdp, A, 2, &[StateId(2), StateId(3)]).unwrap();
        assert_eq!(best.value, 0.0);
        assert_eq!(best.trajectory.actions, vec![ActionId(1), ActionId(0)]);

        // Every action from B enters {B, G}.
        let (mdp, _) = fixtures::chain3(3.0);
        assert!(max_avoiding_return(&mdp, B, 1, &[B, G]).is_none());
    }

    #[test]
    fn containing_maxima() {
        let (mdp, _) = fixtures::chain3(3.0);
        let best = max_containing_return(&mdp, A, 2, G, &[]).unwrap();
        assert!(close(best.value, 3.7));
        assert_eq!(best.trajectory.actions, vec![FWD, FWD]);
        assert!(max_containing_return(&mdp, A, 1, G, &[]).is_none());

        let (mdp, _) = fixtures::twogoal(2.5, 1.0);
        let best = max_containing_return(&mdp, A, 2, StateId(2), &[StateId(3)]).unwrap();
        assert!(close(best.value, 2.25));
        assert_eq!(best.trajectory.actions, vec![ActionId(1), ActionId(1)]);
    }

    #[test]
    fn trajectory_helpers() {
        let (mdp, _) = fixtures::chain3(3.0);
        let t = Trajectory::from_actions(&mdp, A, vec![FWD, FWD]);
        assert_eq!(t.states, vec![B, G]);
        assert_eq!(t.first_entry(G), Some(2));
        assert_eq!(t.describe(&mdp), "A -fwd-> B -fwd-> G");
    }
}
