//! Finite MDP without a reward attached: dynamics, initial distribution, discount.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probability rows summing to one.
pub const PROB_TOL: f64 = 1e-12;

/// A finite Markov decision process stripped of its reward function.
///
/// The transition tensor is stored dense, indexed `(s, a, s')` in row-major
/// order. Immutable after construction; every row is validated to be a
/// probability distribution at build time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>,
    initial_dist: Vec<f64>,
    discount: f64,
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        initial_dist: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Precondition(
                "n_states and n_actions must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::Precondition(format!(
                "discount must lie in [0, 1), got {discount}"
            )));
        }
        let expected = n_states * n_actions * n_states;
        if transition.len() != expected {
            return Err(Error::dim(
                format!("{expected} transition entries"),
                format!("{}", transition.len()),
            ));
        }
        if initial_dist.len() != n_states {
            return Err(Error::dim(
                format!("{n_states} initial probabilities"),
                format!("{}", initial_dist.len()),
            ));
        }
        validate_distribution(&initial_dist, "initial_dist")?;
        for s in 0..n_states {
            for a in 0..n_actions {
                let row = &transition[(s * n_actions + a) * n_states..][..n_states];
                validate_distribution(row, &format!("transition row (s={s}, a={a})"))?;
            }
        }
        Ok(TabularMdp {
            n_states,
            n_actions,
            transition,
            initial_dist,
            discount,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    /// P(s' | s, a).
    #[inline]
    pub fn transition(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.transition[(s * self.n_actions + a) * self.n_states + s2]
    }

    /// The row P(· | s, a).
    #[inline]
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        &self.transition[(s * self.n_actions + a) * self.n_states..][..self.n_states]
    }

    pub fn transition_tensor(&self) -> &[f64] {
        &self.transition
    }
}

pub(crate) fn validate_distribution(p: &[f64], what: &str) -> Result<()> {
    let mut sum = 0.0;
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{what}[{i}] = {v} is negative or non-finite"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {sum}, expected 1 within {PROB_TOL:e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_two_state_chain() {
        // action 0 moves 0 -> 1, state 1 absorbing
        let t = vec![0.0, 1.0, 0.0, 1.0];
        let mdp = TabularMdp::new(2, 1, t, vec![1.0, 0.0], 0.9).unwrap();
        assert_eq!(mdp.transition(0, 0, 1), 1.0);
        assert_eq!(mdp.transition_row(1, 0), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_row() {
        let t = vec![0.3, 0.3, 0.0, 1.0];
        let err = TabularMdp::new(2, 1, t, vec![1.0, 0.0], 0.9).unwrap_err();
        assert!(matches!(err, Error::InvalidDistribution(_)));
    }

    #[test]
    fn rejects_discount_one() {
        let t = vec![1.0, 0.0, 0.0, 1.0];
        assert!(TabularMdp::new(2, 1, t, vec![0.5, 0.5], 1.0).is_err());
    }

    #[test]
    fn rejects_negative_probability() {
        let t = vec![1.5, -0.5, 0.0, 1.0];
        assert!(TabularMdp::new(2, 1, t, vec![1.0, 0.0], 0.9).is_err());
    }
}
