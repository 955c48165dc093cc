//! Canonically shaped rewards, computed exactly (tabular) or by sampling
//! (black-box).
//!
//! The canonical form of `R` adds an expectation term that cancels every
//! potential shaping and centers the reward:
//!
//! `C(R)(s,a,s') = R(s,a,s') + E[γR(s',A,X) − R(s,A,X) − γR(S,A,X)]`
//!
//! with `S, X ~ D_S` i.i.d. and `A ~ D_A`. Rewards that differ by shaping
//! map to the same canonical table, which is what makes the downstream
//! Pearson comparison invariant on equivalence classes.

use rayon::prelude::*;

use crate::coverage::TabularCoverage;
use crate::error::{Error, Result};
use crate::reward::{RewardFunction, RewardTable};

/// A canonically shaped reward table plus the inputs that produced it.
#[derive(Debug, Clone)]
pub struct CanonicalRewardTable {
    values: RewardTable,
    discount: f64,
}

impl CanonicalRewardTable {
    pub fn values(&self) -> &RewardTable {
        &self.values
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Mean under the product `D_S × D_A × D_S`; zero for any canonical
    /// table, up to rounding.
    pub fn product_mean(&self, dist: &TabularCoverage) -> f64 {
        let ds = dist.state_marginal();
        let da = dist.action_marginal();
        let mut acc = Kahan::default();
        for s in 0..self.values.n_states() {
            for a in 0..self.values.n_actions() {
                for s2 in 0..self.values.n_states() {
                    acc.add(ds[s] * da[a] * ds[s2] * self.values.get(s, a, s2));
                }
            }
        }
        acc.sum()
    }
}

/// Exact canonicalization by weighted sums over `D_S` and `D_A`.
pub fn canonicalize_exact(
    reward: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
) -> Result<CanonicalRewardTable> {
    dist.shape_matches(reward.n_states(), reward.n_actions())?;
    let ds = dist.state_marginal();
    let da = dist.action_marginal();
    let n_states = reward.n_states();
    let n_actions = reward.n_actions();

    // per-state expectation m(x) = E_{A,X}[R(x, A, X)]
    let mut m = vec![0.0; n_states];
    for (x, mx) in m.iter_mut().enumerate() {
        let mut acc = Kahan::default();
        for a in 0..n_actions {
            for x2 in 0..n_states {
                acc.add(da[a] * ds[x2] * reward.get(x, a, x2));
            }
        }
        *mx = acc.sum();
    }
    // grand mean E_{S,A,X}[R(S, A, X)]
    let mut grand = Kahan::default();
    for (x, &mx) in m.iter().enumerate() {
        grand.add(ds[x] * mx);
    }
    let grand = grand.sum();

    let values = RewardTable::from_fn(n_states, n_actions, |s, a, s2| {
        reward.get(s, a, s2) + discount * m[s2] - m[s] - discount * grand
    })?;
    Ok(CanonicalRewardTable { values, discount })
}

/// The shaping applied by canonicalization, `C(R) − R`, as a table.
pub fn canonical_shaping(
    reward: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
) -> Result<RewardTable> {
    let canon = canonicalize_exact(reward, dist, discount)?;
    RewardTable::from_fn(reward.n_states(), reward.n_actions(), |s, a, s2| {
        canon.values.get(s, a, s2) - reward.get(s, a, s2)
    })
}

/// Closed form for how much a single-transition perturbation of magnitude
/// `lambda` at `(x, u, x')` can move the canonicalization shaping term:
/// `|λ|·(1 + γ·D_S(x))·D_A(u)·D_S(x')`.
pub fn canonical_perturbation_norm(
    dist: &TabularCoverage,
    x: usize,
    u: usize,
    x2: usize,
    lambda: f64,
    discount: f64,
) -> Result<f64> {
    if dist.n_states() < 2 {
        return Err(Error::Precondition(
            "perturbation norm requires at least 2 states".into(),
        ));
    }
    if x >= dist.n_states() || x2 >= dist.n_states() || u >= dist.n_actions() {
        return Err(Error::Precondition(format!(
            "perturbed transition ({x}, {u}, {x2}) out of range"
        )));
    }
    let ds = dist.state_marginal();
    let da = dist.action_marginal();
    Ok(lambda.abs() * (1.0 + discount * ds[x]) * da[u] * ds[x2])
}

/// Sampled canonicalization of a black-box reward on a batch of transitions.
///
/// For each transition in `batch_v`, the two state-conditional expectations
/// are approximated by means over `batch_m` (pairs `(x, u)` drawn from
/// `D_S × D_A`). The constant term `γ·E[R(S,A,X)]` is dropped, so the output
/// equals the true canonical values shifted by one scalar; Pearson distance
/// is invariant to that shift. Cost is `O(N_V · N_M)` reward queries.
pub fn canonicalize_sampled(
    reward: &dyn RewardFunction,
    batch_v: &crate::coverage::Transitions,
    batch_m_states: &[f64],
    batch_m_actions: &[f64],
    discount: f64,
) -> Result<Vec<f64>> {
    let sd = reward.state_dim();
    let ad = reward.action_dim();
    let n_v = batch_v.len;
    let n_m = batch_m_actions.len() / ad.max(1);
    if n_m == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if batch_m_states.len() != n_m * sd {
        return Err(Error::dim(
            format!("{} mean-batch state values", n_m * sd),
            format!("{}", batch_m_states.len()),
        ));
    }

    let base = reward.evaluate_vec(&batch_v.states, &batch_v.actions, &batch_v.next_states);
    if let Some(i) = base.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "canonicalize_sampled base batch".into(),
            index: i,
        });
    }

    // mean of R(x_fixed, u_j, x_j) over the mean batch
    let state_mean = |state: &[f64], ctx: &str, idx: usize| -> Result<f64> {
        let mut tiled = Vec::with_capacity(n_m * sd);
        for _ in 0..n_m {
            tiled.extend_from_slice(state);
        }
        let vals = reward.evaluate_vec(&tiled, batch_m_actions, batch_m_states);
        let mut acc = Kahan::default();
        for (j, &v) in vals.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("{ctx} (transition {idx}, mean batch {j})"),
                    index: j,
                });
            }
            acc.add(v);
        }
        Ok(acc.sum() / n_m as f64)
    };

    (0..n_v)
        .into_par_iter()
        .map(|i| {
            let s = &batch_v.states[i * sd..(i + 1) * sd];
            let s2 = &batch_v.next_states[i * sd..(i + 1) * sd];
            let mean_from_next = state_mean(s2, "canonicalize_sampled next-state term", i)?;
            let mean_from_cur = state_mean(s, "canonicalize_sampled state term", i)?;
            Ok(base[i] + discount * mean_from_next - mean_from_cur)
        })
        .collect()
}

/// Compensated (Kahan) accumulator.
#[derive(Default, Clone, Copy)]
pub(crate) struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.sum
    }
}
