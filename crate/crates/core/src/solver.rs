//! Tabular solvers: value iteration, exact policy returns, and the
//! empirical optimal-policy regret-bound checker.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::coverage::TabularCoverage;
use crate::distances::epic_exact;
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::reward::RewardTable;

/// Greedy actions are all actions within this absolute tolerance of the
/// maximal Q-value.
pub const TIE_TOL: f64 = 1e-9;

/// Result of value iteration.
#[derive(Debug, Clone)]
pub struct ValueSolution {
    pub values: Vec<f64>,
    /// Per-state set of greedy actions (within [`TIE_TOL`] of the max).
    pub greedy: Vec<Vec<usize>>,
    pub iterations: usize,
    /// Bellman residual `‖V − T(V)‖∞` at the returned values.
    pub residual: f64,
}

impl ValueSolution {
    /// Deterministic policy matrix picking the first greedy action per state.
    pub fn deterministic_policy(&self, n_actions: usize) -> Vec<f64> {
        let n_states = self.greedy.len();
        let mut policy = vec![0.0; n_states * n_actions];
        for (s, actions) in self.greedy.iter().enumerate() {
            policy[s * n_actions + actions[0]] = 1.0;
        }
        policy
    }
}

/// Value iteration to within `tol` of the fixed point.
pub fn value_iteration(
    mdp: &TabularMdp,
    reward: &RewardTable,
    tol: f64,
    max_iter: usize,
) -> Result<ValueSolution> {
    check_shapes(mdp, reward)?;
    let ns = mdp.n_states();
    let na = mdp.n_actions();
    let gamma = mdp.discount();

    // expected immediate reward per (s, a)
    let mut expected_r = vec![0.0; ns * na];
    for s in 0..ns {
        for a in 0..na {
            let row = mdp.transition_row(s, a);
            let mut acc = 0.0;
            for (s2, &p) in row.iter().enumerate() {
                acc += p * reward.get(s, a, s2);
            }
            expected_r[s * na + a] = acc;
        }
    }

    // contraction-based stopping rule guaranteeing ‖V − V*‖∞ <= tol
    let stop = if gamma > 0.0 {
        tol * (1.0 - gamma) / gamma
    } else {
        tol
    };

    let mut values = vec![0.0; ns];
    let mut next = vec![0.0; ns];
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    while delta > stop {
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual: delta,
            });
        }
        delta = 0.0;
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let row = mdp.transition_row(s, a);
                let mut q = expected_r[s * na + a];
                for (s2, &p) in row.iter().enumerate() {
                    q += gamma * p * values[s2];
                }
                if q > best {
                    best = q;
                }
            }
            delta = delta.max((best - values[s]).abs());
            next[s] = best;
        }
        std::mem::swap(&mut values, &mut next);
        iterations += 1;
    }

    // final sweep: Bellman residual and greedy sets at the returned values
    let mut residual = 0.0f64;
    let mut greedy = Vec::with_capacity(ns);
    for s in 0..ns {
        let mut qs = Vec::with_capacity(na);
        let mut best = f64::NEG_INFINITY;
        for a in 0..na {
            let row = mdp.transition_row(s, a);
            let mut q = expected_r[s * na + a];
            for (s2, &p) in row.iter().enumerate() {
                q += gamma * p * values[s2];
            }
            if q > best {
                best = q;
            }
            qs.push(q);
        }
        residual = residual.max((best - values[s]).abs());
        let set: Vec<usize> = (0..na).filter(|&a| qs[a] >= best - TIE_TOL).collect();
        greedy.push(set);
    }

    Ok(ValueSolution {
        values,
        greedy,
        iterations,
        residual,
    })
}

/// Exact expected discounted return of a stochastic policy, via the linear
/// solve of the policy-induced Bellman equation.
pub fn policy_return(mdp: &TabularMdp, reward: &RewardTable, policy: &[f64]) -> Result<f64> {
    check_shapes(mdp, reward)?;
    let ns = mdp.n_states();
    let na = mdp.n_actions();
    if policy.len() != ns * na {
        return Err(Error::dim(
            format!("{}-entry policy", ns * na),
            format!("{}", policy.len()),
        ));
    }
    for s in 0..ns {
        crate::mdp::validate_distribution(&policy[s * na..(s + 1) * na], &format!("policy row {s}"))?;
    }
    let gamma = mdp.discount();

    let mut r_pi = DVector::zeros(ns);
    let mut p_pi = DMatrix::zeros(ns, ns);
    for s in 0..ns {
        for a in 0..na {
            let pa = policy[s * na + a];
            if pa == 0.0 {
                continue;
            }
            let row = mdp.transition_row(s, a);
            for (s2, &p) in row.iter().enumerate() {
                r_pi[s] += pa * p * reward.get(s, a, s2);
                p_pi[(s, s2)] += pa * p;
            }
        }
    }
    let system = DMatrix::identity(ns, ns) - p_pi * gamma;
    let v = system
        .lu()
        .solve(&r_pi)
        .ok_or_else(|| Error::Singular("policy Bellman system".into()))?;
    Ok(mdp
        .initial_dist()
        .iter()
        .zip(v.iter())
        .map(|(&d0, &vs)| d0 * vs)
        .sum())
}

/// Both sides of the optimal-policy regret bound for one reward pair.
#[derive(Debug, Clone, Serialize)]
pub struct RegretReport {
    /// Regret under reward A of running B's optimal policy.
    pub lhs: f64,
    /// `16·K·‖R_A‖₂·(1 − γ)⁻¹·EPIC(R_A, R_B)`.
    pub rhs: f64,
    pub k: f64,
    pub epic: f64,
    pub holds: bool,
}

/// Check the optimal-policy regret bound on a uniform coverage distribution,
/// where the coverage constant is `K = |S|²·|A|`.
pub fn regret_bound_check(
    mdp: &TabularMdp,
    a: &RewardTable,
    b: &RewardTable,
    dist: &TabularCoverage,
) -> Result<RegretReport> {
    check_shapes(mdp, a)?;
    check_shapes(mdp, b)?;
    dist.shape_matches(mdp.n_states(), mdp.n_actions())?;
    if !dist.is_uniform() {
        return Err(Error::Precondition(
            "regret bound check requires a uniform coverage distribution".into(),
        ));
    }
    let ns = mdp.n_states();
    let na = mdp.n_actions();
    let k = (ns * ns * na) as f64;

    let sol_a = value_iteration(mdp, a, 1e-12, 1_000_000)?;
    let sol_b = value_iteration(mdp, b, 1e-12, 1_000_000)?;
    let pi_a = sol_a.deterministic_policy(na);
    let pi_b = sol_b.deterministic_policy(na);
    let lhs = policy_return(mdp, a, &pi_a)? - policy_return(mdp, a, &pi_b)?;

    let epic = epic_exact(a, b, dist, mdp.discount())?;
    let norm_a = dist
        .joint()
        .iter()
        .zip(a.values())
        .map(|(&w, &r)| w * r * r)
        .sum::<f64>()
        .sqrt();
    let rhs = 16.0 * k * norm_a / (1.0 - mdp.discount()) * epic;
    Ok(RegretReport {
        lhs,
        rhs,
        k,
        epic,
        holds: lhs <= rhs + 1e-9,
    })
}

fn check_shapes(mdp: &TabularMdp, reward: &RewardTable) -> Result<()> {
    if mdp.n_states() == reward.n_states() && mdp.n_actions() == reward.n_actions() {
        Ok(())
    } else {
        Err(Error::dim(
            format!("reward shaped {}x{}", mdp.n_states(), mdp.n_actions()),
            format!("{}x{}", reward.n_states(), reward.n_actions()),
        ))
    }
}
