//! Square gridworld with a small family of hand-designed rewards.
//!
//! The grid has five actions (left, right, up, down, stay); moves off the
//! edge resolve to staying in place. The goal sits at the right end of the
//! middle row. Rewards are paid on entry to the destination cell:
//!
//! * `SparseGoal` — +1 for entering the goal.
//! * `DenseGoal`  — a rescaled and shaped `SparseGoal`, equivalent to it by
//!   construction.
//! * `DirtPath`   — `SparseGoal` with a −1 dirt band on the middle-row
//!   non-goal cells and a milder −1.25 dirt on the bottom row.
//! * `CliffWalk`  — `DirtPath` with the bottom row's dirt replaced by a −4
//!   cliff.
//! * `Zero`       — identically zero.
//! * `SparsePenalty` — `SparseGoal` with a −0.25 charge on non-stay actions.
//!
//! Under deterministic dynamics `DirtPath` and `CliffWalk` induce identical
//! greedy policies; with slippery dynamics the cliff pushes the optimal
//! route away from the hazard row and the policies diverge.

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::reward::{apply_equivalence, EquivalenceTransform, RewardTable};

/// Actions in index order: left, right, up, down, stay.
pub const GRID_ACTIONS: usize = 5;

const LEFT: usize = 0;
const RIGHT: usize = 1;
const UP: usize = 2;
const DOWN: usize = 3;
const STAY: usize = 4;

const MIDDLE_DIRT: f64 = -1.0;
const BOTTOM_DIRT: f64 = -1.25;
const CLIFF: f64 = -4.0;
const ACTION_PENALTY: f64 = -0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridworldReward {
    SparseGoal,
    DenseGoal,
    DirtPath,
    CliffWalk,
    Zero,
    SparsePenalty,
}

impl GridworldReward {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sparse_goal" => Ok(GridworldReward::SparseGoal),
            "dense_goal" => Ok(GridworldReward::DenseGoal),
            "dirt_path" => Ok(GridworldReward::DirtPath),
            "cliff_walk" => Ok(GridworldReward::CliffWalk),
            "zero" => Ok(GridworldReward::Zero),
            "sparse_penalty" => Ok(GridworldReward::SparsePenalty),
            other => Err(Error::UnknownName(format!("gridworld reward `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GridworldReward::SparseGoal => "sparse_goal",
            GridworldReward::DenseGoal => "dense_goal",
            GridworldReward::DirtPath => "dirt_path",
            GridworldReward::CliffWalk => "cliff_walk",
            GridworldReward::Zero => "zero",
            GridworldReward::SparsePenalty => "sparse_penalty",
        }
    }

    pub fn all() -> [GridworldReward; 6] {
        [
            GridworldReward::SparseGoal,
            GridworldReward::DenseGoal,
            GridworldReward::DirtPath,
            GridworldReward::CliffWalk,
            GridworldReward::Zero,
            GridworldReward::SparsePenalty,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridworldDynamics {
    Deterministic,
    /// With the given probability the agent moves in a uniformly random
    /// perpendicular direction instead of the intended one. Stay never slips.
    Slippery(f64),
}

#[derive(Debug, Clone)]
pub struct GridworldSpec {
    pub side: usize,
    pub reward: GridworldReward,
    pub dynamics: GridworldDynamics,
    pub discount: f64,
}

impl Default for GridworldSpec {
    fn default() -> Self {
        GridworldSpec {
            side: 3,
            reward: GridworldReward::SparseGoal,
            dynamics: GridworldDynamics::Deterministic,
            discount: 0.99,
        }
    }
}

pub fn build_gridworld(spec: &GridworldSpec) -> Result<(TabularMdp, RewardTable)> {
    if spec.side < 2 {
        return Err(Error::Precondition("gridworld side must be >= 2".into()));
    }
    if let GridworldDynamics::Slippery(p) = spec.dynamics {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Precondition(format!(
                "slip probability must lie in [0, 1], got {p}"
            )));
        }
    }
    let side = spec.side;
    let n_states = side * side;
    let mut transition = vec![0.0; n_states * GRID_ACTIONS * n_states];
    for s in 0..n_states {
        for a in 0..GRID_ACTIONS {
            let base = (s * GRID_ACTIONS + a) * n_states;
            match spec.dynamics {
                GridworldDynamics::Deterministic => {
                    transition[base + step(side, s, a)] += 1.0;
                }
                GridworldDynamics::Slippery(p_slip) => {
                    if a == STAY {
                        transition[base + s] += 1.0;
                    } else {
                        transition[base + step(side, s, a)] += 1.0 - p_slip;
                        for perp in perpendicular(a) {
                            transition[base + step(side, s, perp)] += p_slip / 2.0;
                        }
                    }
                }
            }
        }
    }
    let initial = vec![1.0 / n_states as f64; n_states];
    let mdp = TabularMdp::new(n_states, GRID_ACTIONS, transition, initial, spec.discount)?;
    let reward = gridworld_reward(side, spec.reward, spec.discount)?;
    Ok((mdp, reward))
}

fn gridworld_reward(side: usize, kind: GridworldReward, discount: f64) -> Result<RewardTable> {
    let n_states = side * side;
    let goal = goal_cell(side);
    let middle = side / 2;
    let bottom = side - 1;
    let row = |cell: usize| cell / side;

    let sparse = RewardTable::from_fn(n_states, GRID_ACTIONS, |_, _, s2| {
        if s2 == goal {
            1.0
        } else {
            0.0
        }
    })?;

    match kind {
        GridworldReward::SparseGoal => Ok(sparse),
        GridworldReward::DenseGoal => {
            // rescaled and shaped sparse reward; equivalent by construction
            let potential: Vec<f64> = (0..n_states)
                .map(|cell| -(manhattan(side, cell, goal) as f64) * 2.0)
                .collect();
            let tf = EquivalenceTransform::new(2.5, potential)?;
            apply_equivalence(&sparse, &tf, discount)
        }
        GridworldReward::DirtPath => RewardTable::from_fn(n_states, GRID_ACTIONS, |_, _, s2| {
            if s2 == goal {
                1.0
            } else if row(s2) == middle {
                MIDDLE_DIRT
            } else if row(s2) == bottom {
                BOTTOM_DIRT
            } else {
                0.0
            }
        }),
        GridworldReward::CliffWalk => RewardTable::from_fn(n_states, GRID_ACTIONS, |_, _, s2| {
            if s2 == goal {
                1.0
            } else if row(s2) == middle {
                MIDDLE_DIRT
            } else if row(s2) == bottom {
                CLIFF
            } else {
                0.0
            }
        }),
        GridworldReward::Zero => Ok(RewardTable::zeros(n_states, GRID_ACTIONS)),
        GridworldReward::SparsePenalty => {
            RewardTable::from_fn(n_states, GRID_ACTIONS, |_, a, s2| {
                let goal_bonus = if s2 == goal { 1.0 } else { 0.0 };
                let penalty = if a == STAY { 0.0 } else { ACTION_PENALTY };
                goal_bonus + penalty
            })
        }
    }
}

/// Goal cell: right end of the middle row.
pub(crate) fn goal_cell(side: usize) -> usize {
    (side / 2) * side + (side - 1)
}

fn manhattan(side: usize, a: usize, b: usize) -> usize {
    let (ra, ca) = (a / side, a % side);
    let (rb, cb) = (b / side, b % side);
    ra.abs_diff(rb) + ca.abs_diff(cb)
}

/// Destination of a move; off-grid resolves to staying in place.
fn step(side: usize, s: usize, action: usize) -> usize {
    let (r, c) = (s / side, s % side);
    let (r2, c2) = match action {
        LEFT => (r, c.wrapping_sub(1)),
        RIGHT => (r, c + 1),
        UP => (r.wrapping_sub(1), c),
        DOWN => (r + 1, c),
        _ => (r, c),
    };
    if r2 >= side || c2 >= side {
        s
    } else {
        r2 * side + c2
    }
}

fn perpendicular(action: usize) -> [usize; 2] {
    match action {
        LEFT | RIGHT => [UP, DOWN],
        _ => [LEFT, RIGHT],
    }
}
