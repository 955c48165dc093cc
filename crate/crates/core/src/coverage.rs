//! Coverage distributions over transitions, with state/action marginals.
//!
//! Distances compare rewards on a distribution `D` over `(s, a, s')`
//! triples; canonicalization additionally needs distributions `D_S` over
//! states and `D_A` over actions. The tabular form stores the joint tensor
//! exactly; the rollout form keeps sample pools and draws seeded batches.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mdp::{validate_distribution, TabularMdp, PROB_TOL};
use crate::trajectory::Trajectory;

/// Exact coverage over a finite transition space.
#[derive(Debug, Clone)]
pub struct TabularCoverage {
    n_states: usize,
    n_actions: usize,
    joint: Vec<f64>,
    state_marginal: Vec<f64>,
    action_marginal: Vec<f64>,
}

impl TabularCoverage {
    /// Build from a joint tensor over `(s, a, s')`; the state marginal is
    /// taken over the first coordinate.
    pub fn from_joint(n_states: usize, n_actions: usize, joint: Vec<f64>) -> Result<Self> {
        let expected = n_states * n_actions * n_states;
        if joint.len() != expected {
            return Err(Error::dim(
                format!("{expected} joint entries"),
                format!("{}", joint.len()),
            ));
        }
        let mut sum = 0.0;
        for (i, &v) in joint.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "joint[{i}] = {v} is negative or non-finite"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "joint sums to {sum}, expected 1 within {PROB_TOL:e}"
            )));
        }
        let mut state_marginal = vec![0.0; n_states];
        let mut action_marginal = vec![0.0; n_actions];
        let mut idx = 0;
        for s in 0..n_states {
            for a in 0..n_actions {
                for _s2 in 0..n_states {
                    state_marginal[s] += joint[idx];
                    action_marginal[a] += joint[idx];
                    idx += 1;
                }
            }
        }
        Ok(TabularCoverage {
            n_states,
            n_actions,
            joint,
            state_marginal,
            action_marginal,
        })
    }

    /// Uniform over every `(s, a, s')` triple.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let n = n_states * n_actions * n_states;
        let p = 1.0 / n as f64;
        TabularCoverage {
            n_states,
            n_actions,
            joint: vec![p; n],
            state_marginal: vec![1.0 / n_states as f64; n_states],
            action_marginal: vec![1.0 / n_actions as f64; n_actions],
        }
    }

    /// Uniform over `(s, a)` pairs with `s'` drawn from the MDP dynamics.
    pub fn uniform_state_action(mdp: &TabularMdp) -> Self {
        let (ns, na) = (mdp.n_states(), mdp.n_actions());
        let scale = 1.0 / (ns * na) as f64;
        let joint: Vec<f64> = mdp.transition_tensor().iter().map(|&t| t * scale).collect();
        let mut cov = TabularCoverage {
            n_states: ns,
            n_actions: na,
            joint,
            state_marginal: vec![1.0 / ns as f64; ns],
            action_marginal: vec![1.0 / na as f64; na],
        };
        // guard against dynamics rounding drift
        let sum: f64 = cov.joint.iter().sum();
        for v in &mut cov.joint {
            *v /= sum;
        }
        cov
    }

    /// Product coverage `D_S × D_A × D_S`.
    pub fn product(state_dist: &[f64], action_dist: &[f64]) -> Result<Self> {
        validate_distribution(state_dist, "state_dist")?;
        validate_distribution(action_dist, "action_dist")?;
        let ns = state_dist.len();
        let na = action_dist.len();
        let mut joint = Vec::with_capacity(ns * na * ns);
        for s in 0..ns {
            for a in 0..na {
                for s2 in 0..ns {
                    joint.push(state_dist[s] * action_dist[a] * state_dist[s2]);
                }
            }
        }
        let total: f64 = joint.iter().sum();
        for v in &mut joint {
            *v /= total;
        }
        TabularCoverage::from_joint(ns, na, joint)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Joint probabilities over `(s, a, s')`, flat in row-major order.
    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    pub fn state_marginal(&self) -> &[f64] {
        &self.state_marginal
    }

    pub fn action_marginal(&self) -> &[f64] {
        &self.action_marginal
    }

    pub fn is_uniform(&self) -> bool {
        let p = 1.0 / self.joint.len() as f64;
        self.joint.iter().all(|&v| (v - p).abs() <= 1e-12)
    }

    pub(crate) fn shape_matches(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if self.n_states == n_states && self.n_actions == n_actions {
            Ok(())
        } else {
            Err(Error::dim(
                format!("coverage over {n_states}x{n_actions}"),
                format!("{}x{}", self.n_states, self.n_actions),
            ))
        }
    }
}

/// A batch of transitions in flat row-major layout.
#[derive(Debug, Clone, Default)]
pub struct Transitions {
    pub states: Vec<f64>,
    pub actions: Vec<f64>,
    pub next_states: Vec<f64>,
    pub len: usize,
}

/// Seeded sampler producing transition batches from `D` and independent
/// state/action batches from `D_S × D_A`. Same seed, same batches.
pub trait TransitionSampler: Sync {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn sample_transitions(&self, n: usize, rng: &mut ChaCha8Rng) -> Transitions;
    /// Draw `(x, u)` pairs with `x ~ D_S` and `u ~ D_A` independently.
    fn sample_state_action(&self, n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>);
}

/// How a tabular sampler encodes states for black-box reward evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateEncoding {
    /// Length-1 vector holding the state index.
    Indexed,
    /// One-hot vector of length `n_states`.
    OneHot,
}

/// Samples from a [`TabularCoverage`], encoding indices for black-box use.
pub struct TabularSampler {
    coverage: TabularCoverage,
    encoding: StateEncoding,
    joint_cdf: Vec<f64>,
    state_cdf: Vec<f64>,
    action_cdf: Vec<f64>,
}

impl TabularSampler {
    pub fn new(coverage: TabularCoverage, encoding: StateEncoding) -> Self {
        let joint_cdf = cumulative(&coverage.joint);
        let state_cdf = cumulative(&coverage.state_marginal);
        let action_cdf = cumulative(&coverage.action_marginal);
        TabularSampler {
            coverage,
            encoding,
            joint_cdf,
            state_cdf,
            action_cdf,
        }
    }

    fn push_state(&self, out: &mut Vec<f64>, s: usize) {
        match self.encoding {
            StateEncoding::Indexed => out.push(s as f64),
            StateEncoding::OneHot => {
                let start = out.len();
                out.resize(start + self.coverage.n_states, 0.0);
                out[start + s] = 1.0;
            }
        }
    }
}

impl TransitionSampler for TabularSampler {
    fn state_dim(&self) -> usize {
        match self.encoding {
            StateEncoding::Indexed => 1,
            StateEncoding::OneHot => self.coverage.n_states,
        }
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn sample_transitions(&self, n: usize, rng: &mut ChaCha8Rng) -> Transitions {
        let mut out = Transitions {
            states: Vec::with_capacity(n * self.state_dim()),
            actions: Vec::with_capacity(n),
            next_states: Vec::with_capacity(n * self.state_dim()),
            len: n,
        };
        let (ns, na) = (self.coverage.n_states, self.coverage.n_actions);
        for _ in 0..n {
            let flat = draw(&self.joint_cdf, rng);
            let s2 = flat % ns;
            let a = (flat / ns) % na;
            let s = flat / (ns * na);
            self.push_state(&mut out.states, s);
            out.actions.push(a as f64);
            self.push_state(&mut out.next_states, s2);
        }
        out
    }

    fn sample_state_action(&self, n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let mut states = Vec::with_capacity(n * self.state_dim());
        let mut actions = Vec::with_capacity(n);
        for _ in 0..n {
            let s = draw(&self.state_cdf, rng);
            let a = draw(&self.action_cdf, rng);
            self.push_state(&mut states, s);
            actions.push(a as f64);
        }
        (states, actions)
    }
}

/// Empirical coverage from rollout trajectories: `D` is uniform over the
/// collected transitions, `D_S` over all visited states (including final
/// states) and `D_A` over all taken actions.
pub struct RolloutCoverage {
    state_dim: usize,
    action_dim: usize,
    tr_states: Vec<f64>,
    tr_actions: Vec<f64>,
    tr_next: Vec<f64>,
    n_transitions: usize,
    pool_states: Vec<f64>,
    n_pool_states: usize,
}

impl RolloutCoverage {
    pub fn from_trajectories(trajectories: &[Trajectory]) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
        let sd = first.state_dim();
        let ad = first.action_dim();
        let mut cov = RolloutCoverage {
            state_dim: sd,
            action_dim: ad,
            tr_states: Vec::new(),
            tr_actions: Vec::new(),
            tr_next: Vec::new(),
            n_transitions: 0,
            pool_states: Vec::new(),
            n_pool_states: 0,
        };
        for tr in trajectories {
            if tr.state_dim() != sd || tr.action_dim() != ad {
                return Err(Error::dim(
                    format!("trajectories of state dim {sd}, action dim {ad}"),
                    format!("{}x{}", tr.state_dim(), tr.action_dim()),
                ));
            }
            let t = tr.len();
            cov.tr_states.extend_from_slice(&tr.states()[..t * sd]);
            cov.tr_actions.extend_from_slice(tr.actions());
            cov.tr_next.extend_from_slice(&tr.states()[sd..]);
            cov.n_transitions += t;
            cov.pool_states.extend_from_slice(tr.states());
            cov.n_pool_states += t + 1;
        }
        Ok(cov)
    }

    pub fn n_transitions(&self) -> usize {
        self.n_transitions
    }
}

impl TransitionSampler for RolloutCoverage {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn action_dim(&self) -> usize {
        self.action_dim
    }

    fn sample_transitions(&self, n: usize, rng: &mut ChaCha8Rng) -> Transitions {
        let (sd, ad) = (self.state_dim, self.action_dim);
        let mut out = Transitions {
            states: Vec::with_capacity(n * sd),
            actions: Vec::with_capacity(n * ad),
            next_states: Vec::with_capacity(n * sd),
            len: n,
        };
        for _ in 0..n {
            let i = rng.random_range(0..self.n_transitions);
            out.states.extend_from_slice(&self.tr_states[i * sd..(i + 1) * sd]);
            out.actions
                .extend_from_slice(&self.tr_actions[i * ad..(i + 1) * ad]);
            out.next_states
                .extend_from_slice(&self.tr_next[i * sd..(i + 1) * sd]);
        }
        out
    }

    fn sample_state_action(&self, n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let (sd, ad) = (self.state_dim, self.action_dim);
        let mut states = Vec::with_capacity(n * sd);
        let mut actions = Vec::with_capacity(n * ad);
        for _ in 0..n {
            let i = rng.random_range(0..self.n_pool_states);
            states.extend_from_slice(&self.pool_states[i * sd..(i + 1) * sd]);
            let j = rng.random_range(0..self.n_transitions);
            actions.extend_from_slice(&self.tr_actions[j * ad..(j + 1) * ad]);
        }
        (states, actions)
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(p.len());
    for &v in p {
        acc += v;
        out.push(acc);
    }
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
        Ok(i) => (i + 1).min(cdf.len() - 1),
        Err(i) => i.min(cdf.len() - 1),
    }
}
