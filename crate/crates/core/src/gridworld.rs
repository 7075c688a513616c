//! 4-connected gridworld instances.
//!
//! Cells are `(x, y)` with `x < width`, `y < height`; `up` decreases `y`.
//! Wall cells are not states. Bumping into a wall or the boundary leaves the
//! agent in place, and goal cells are absorbing. Every non-goal state earns
//! `step_reward`; goal rewards start at 0, ready for synthesis.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::error::ModelError;
use crate::mdp::{DeterministicMdp, StateId, TaskSpec};

pub type Cell = (usize, usize);

pub const ACTIONS: [&str; 4] = ["up", "down", "left", "right"];

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub walls: Vec<Cell>,
    pub start: Cell,
    pub goals: Vec<Cell>,
    pub step_reward: f64,
    pub gamma: f64,
    pub deadline: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid must be at least 1x1 (got {0}x{1})")]
    Empty(usize, usize),
    #[error("cell ({0}, {1}) is out of bounds")]
    OutOfBounds(usize, usize),
    #[error("cell ({0}, {1}) is a wall")]
    OnWall(usize, usize),
    #[error("at least one goal is required")]
    NoGoals,
    #[error("deadline must be positive")]
    ZeroDeadline,
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn cell_name((x, y): Cell) -> String {
    format!("c{x}_{y}")
}

pub fn generate_gridworld(spec: &GridSpec) -> Result<(DeterministicMdp, TaskSpec), GridError> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(GridError::Empty(w, h));
    }
    let in_bounds = |(x, y): Cell| x < w && y < h;
    for &c in spec.walls.iter().chain([&spec.start]).chain(&spec.goals) {
        if !in_bounds(c) {
            return Err(GridError::OutOfBounds(c.0, c.1));
        }
    }
    let walls: HashSet<Cell> = spec.walls.iter().copied().collect();
    for &c in std::iter::once(&spec.start).chain(&spec.goals) {
        if walls.contains(&c) {
            return Err(GridError::OnWall(c.0, c.1));
        }
    }
    if spec.goals.is_empty() {
        return Err(GridError::NoGoals);
    }
    if spec.deadline == 0 {
        return Err(GridError::ZeroDeadline);
    }

    let cells: Vec<Cell> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|c| !walls.contains(c))
        .collect();
    let index: HashMap<Cell, StateId> = cells.iter().enumerate().map(|(i, &c)| (c, StateId(i))).collect();
    let goals: HashSet<Cell> = spec.goals.iter().copied().collect();

    let table = cells
        .iter()
        .map(|&(x, y)| {
            let here = index[&(x, y)];
            if goals.contains(&(x, y)) {
                return vec![here; ACTIONS.len()];
            }
            let moves = [
                y.checked_sub(1).map(|y| (x, y)),
                Some((x, y + 1)),
                x.checked_sub(1).map(|x| (x, y)),
                Some((x + 1, y)),
            ];
            moves
                .into_iter()
                .map(|m| m.and_then(|c| index.get(&c).copied()).unwrap_or(here))
                .collect()
        })
        .collect();
    let rewards = cells
        .iter()
        .map(|c| if goals.contains(c) { 0.0 } else { spec.step_reward })
        .collect();

    let mdp = DeterministicMdp::new(
        cells.iter().copied().map(cell_name).collect(),
        ACTIONS.iter().map(|s| s.to_string()).collect(),
        table,
        rewards,
        spec.gamma,
    )?;
    let task = TaskSpec::new(
        index[&spec.start],
        spec.goals.iter().map(|c| index[c]).collect(),
        spec.deadline,
    );
    Ok((mdp, task))
}
