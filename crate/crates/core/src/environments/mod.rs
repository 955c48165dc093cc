//! Built-in test environments and generators.

mod gridworld;
mod pointmass;
mod random;

pub use gridworld::{
    build_gridworld, GridworldDynamics, GridworldReward, GridworldSpec, GRID_ACTIONS,
};
pub use pointmass::{
    pointmass_reward, pointmass_rollout, PointMassConfig, PointMassPolicy, PointMassReward,
    PointMassRewardKind,
};
pub use random::random_mdp;
