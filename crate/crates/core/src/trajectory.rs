//! Episode trajectories and their discounted returns.

use crate::error::{Error, Result};
use crate::reward::RewardFunction;

/// A finite trajectory: `T + 1` states and `T` actions, stored flat.
#[derive(Debug, Clone)]
pub struct Trajectory {
    state_dim: usize,
    action_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
}

impl Trajectory {
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        states: Vec<f64>,
        actions: Vec<f64>,
    ) -> Result<Self> {
        if state_dim == 0 || action_dim == 0 {
            return Err(Error::Precondition("dimensions must be positive".into()));
        }
        if states.len() % state_dim != 0 || actions.len() % action_dim != 0 {
            return Err(Error::dim(
                "flat arrays divisible by their dims",
                format!("{} states, {} actions", states.len(), actions.len()),
            ));
        }
        let n_states = states.len() / state_dim;
        let n_actions = actions.len() / action_dim;
        if n_states != n_actions + 1 || n_actions == 0 {
            return Err(Error::dim(
                "T+1 states and T >= 1 actions",
                format!("{n_states} states, {n_actions} actions"),
            ));
        }
        Ok(Trajectory {
            state_dim,
            action_dim,
            states,
            actions,
        })
    }

    /// Number of steps `T`.
    pub fn len(&self) -> usize {
        self.actions.len() / self.action_dim
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one step
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t * self.state_dim..(t + 1) * self.state_dim]
    }

    /// Discounted return `Σ γ^t R(s_t, a_t, s_{t+1})` with a single batched
    /// reward evaluation.
    pub fn discounted_return(&self, reward: &dyn RewardFunction, discount: f64) -> Result<f64> {
        let t = self.len();
        let sd = self.state_dim;
        let rewards = reward.evaluate_vec(
            &self.states[..t * sd],
            &self.actions,
            &self.states[sd..],
        );
        if rewards.len() != t {
            return Err(Error::dim(
                format!("{t} rewards"),
                format!("{}", rewards.len()),
            ));
        }
        let mut total = 0.0;
        let mut scale = 1.0;
        for (i, &r) in rewards.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::NonFinite {
                    context: "trajectory return".into(),
                    index: i,
                });
            }
            total += scale * r;
            scale *= discount;
        }
        Ok(total)
    }
}
