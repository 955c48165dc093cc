//! One-dimensional point mass: accelerate left or right on a line, try to
//! reach the origin. States are `[position, velocity]`, actions are
//! `[acceleration]`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::reward::RewardFunction;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone)]
pub struct PointMassConfig {
    pub dt: f64,
    pub position_bound: f64,
    pub velocity_bound: f64,
    pub action_bound: f64,
    /// Half-width of the goal region around the origin.
    pub goal_halfwidth: f64,
    /// Coefficient on the quadratic control penalty.
    pub ctrl_coefficient: f64,
    /// Scale of the shaping potential used by the dense reward.
    pub potential_scale: f64,
}

impl Default for PointMassConfig {
    fn default() -> Self {
        PointMassConfig {
            dt: 0.05,
            position_bound: 1.0,
            velocity_bound: 1.0,
            action_bound: 1.0,
            goal_halfwidth: 0.05,
            ctrl_coefficient: 1.0,
            potential_scale: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointMassRewardKind {
    /// 1 inside the goal region, 0 elsewhere.
    Sparse,
    /// Sparse shaped by the potential `Φ(x, v) = −scale·|x|`; equivalent to
    /// sparse by construction.
    Dense,
    /// Negative distance from the origin.
    Magnitude,
}

impl PointMassRewardKind {
    pub fn parse(name: &str) -> Result<(Self, bool)> {
        match name {
            "sparse" => Ok((PointMassRewardKind::Sparse, false)),
            "dense" => Ok((PointMassRewardKind::Dense, false)),
            "magnitude" => Ok((PointMassRewardKind::Magnitude, false)),
            "sparse_ctrl" => Ok((PointMassRewardKind::Sparse, true)),
            "dense_ctrl" => Ok((PointMassRewardKind::Dense, true)),
            "magnitude_ctrl" => Ok((PointMassRewardKind::Magnitude, true)),
            other => Err(Error::UnknownName(format!("pointmass reward `{other}`"))),
        }
    }
}

/// A point-mass reward over `[x, v]` states and `[a]` actions.
pub struct PointMassReward {
    kind: PointMassRewardKind,
    ctrl_penalty: bool,
    discount: f64,
    config: PointMassConfig,
}

impl PointMassReward {
    fn base(&self, next_pos: f64) -> f64 {
        match self.kind {
            PointMassRewardKind::Sparse | PointMassRewardKind::Dense => {
                if next_pos.abs() <= self.config.goal_halfwidth {
                    1.0
                } else {
                    0.0
                }
            }
            PointMassRewardKind::Magnitude => -next_pos.abs(),
        }
    }

    pub fn potential(&self, pos: f64) -> f64 {
        -self.config.potential_scale * pos.abs()
    }
}

impl RewardFunction for PointMassReward {
    fn state_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, states: &[f64], actions: &[f64], next_states: &[f64], out: &mut Vec<f64>) {
        let n = actions.len();
        out.clear();
        out.reserve(n);
        for i in 0..n {
            let pos = states[i * 2];
            let next_pos = next_states[i * 2];
            let accel = actions[i];
            let mut r = self.base(next_pos);
            if self.kind == PointMassRewardKind::Dense {
                r += self.discount * self.potential(next_pos) - self.potential(pos);
            }
            if self.ctrl_penalty {
                r -= self.config.ctrl_coefficient * accel * accel;
            }
            out.push(r);
        }
    }
}

/// Build one of the point-mass rewards. The discount matters only for the
/// dense (shaped) variant.
pub fn pointmass_reward(
    config: &PointMassConfig,
    kind: PointMassRewardKind,
    ctrl_penalty: bool,
    discount: f64,
) -> PointMassReward {
    PointMassReward {
        kind,
        ctrl_penalty,
        discount,
        config: config.clone(),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PointMassPolicy {
    /// Accelerations drawn uniformly from the action bounds.
    UniformRandom,
    /// A fixed acceleration every step.
    Constant(f64),
}

/// Roll out episodes under the given policy. Initial positions are drawn
/// uniformly from the position bounds with zero initial velocity; dynamics
/// are `x ← x + v·dt`, `v ← v + a·dt`, both clipped at their bounds.
/// Deterministic given the seed.
pub fn pointmass_rollout(
    config: &PointMassConfig,
    policy: PointMassPolicy,
    horizon: usize,
    episodes: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (ep as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut x: f64 = rng.random_range(-config.position_bound..=config.position_bound);
        let mut v: f64 = 0.0;
        let mut states = Vec::with_capacity((horizon + 1) * 2);
        let mut actions = Vec::with_capacity(horizon);
        states.push(x);
        states.push(v);
        for _ in 0..horizon {
            let a = match policy {
                PointMassPolicy::UniformRandom => {
                    rng.random_range(-config.action_bound..=config.action_bound)
                }
                PointMassPolicy::Constant(a) => a,
            };
            x = (x + v * config.dt).clamp(-config.position_bound, config.position_bound);
            v = (v + a * config.dt).clamp(-config.velocity_bound, config.velocity_bound);
            states.push(x);
            states.push(v);
            actions.push(a);
        }
        out.push(Trajectory::new(2, 1, states, actions)?);
    }
    Ok(out)
}
