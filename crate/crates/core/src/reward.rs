//! Reward representations and the equivalence-class transforms acting on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shaping_fit;

/// Dense reward tensor indexed `(s, a, s')`, matching a [`crate::mdp::TabularMdp`]'s shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl RewardTable {
    pub fn new(n_states: usize, n_actions: usize, values: Vec<f64>) -> Result<Self> {
        let expected = n_states * n_actions * n_states;
        if values.len() != expected {
            return Err(Error::dim(
                format!("{expected} reward entries"),
                format!("{}", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "reward table".into(),
                index: i,
            });
        }
        Ok(RewardTable {
            n_states,
            n_actions,
            values,
        })
    }

    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        RewardTable {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions * n_states],
        }
    }

    /// Build from a closure over `(s, a, s')`.
    pub fn from_fn(
        n_states: usize,
        n_actions: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(n_states * n_actions * n_states);
        for s in 0..n_states {
            for a in 0..n_actions {
                for s2 in 0..n_states {
                    values.push(f(s, a, s2));
                }
            }
        }
        RewardTable::new(n_states, n_actions, values)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.values[(s * self.n_actions + a) * self.n_states + s2]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_shape(&self, other: &RewardTable) -> bool {
        self.n_states == other.n_states && self.n_actions == other.n_actions
    }

    pub(crate) fn shape_matches(&self, other: &RewardTable, context: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::dim(
                format!("{}x{} reward in {context}", self.n_states, self.n_actions),
                format!("{}x{}", other.n_states, other.n_actions),
            ))
        }
    }
}

/// Positive rescaling plus potential shaping: `R'(s,a,s') = λ·R(s,a,s') + γΦ(s') − Φ(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceTransform {
    scale: f64,
    potential: Vec<f64>,
}

impl EquivalenceTransform {
    pub fn new(scale: f64, potential: Vec<f64>) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Precondition(format!(
                "scale must be finite and strictly positive, got {scale}"
            )));
        }
        if let Some(i) = potential.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "potential".into(),
                index: i,
            });
        }
        Ok(EquivalenceTransform { scale, potential })
    }

    pub fn identity(n_states: usize) -> Self {
        EquivalenceTransform {
            scale: 1.0,
            potential: vec![0.0; n_states],
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

/// Apply `λ·R + γΦ(s') − Φ(s)` entrywise.
pub fn apply_equivalence(
    reward: &RewardTable,
    tf: &EquivalenceTransform,
    discount: f64,
) -> Result<RewardTable> {
    if tf.potential.len() != reward.n_states {
        return Err(Error::dim(
            format!("potential over {} states", reward.n_states),
            format!("{}", tf.potential.len()),
        ));
    }
    let lambda = tf.scale;
    RewardTable::from_fn(reward.n_states, reward.n_actions, |s, a, s2| {
        lambda * reward.get(s, a, s2) + discount * tf.potential[s2] - tf.potential[s]
    })
}

/// The pure shaping table `γΦ(s') − Φ(s)`; equivalent to the zero reward.
pub fn shaping_only(potential: &[f64], discount: f64, n_actions: usize) -> Result<RewardTable> {
    if let Some(i) = potential.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "potential".into(),
            index: i,
        });
    }
    let n_states = potential.len();
    RewardTable::from_fn(n_states, n_actions, |s, _a, s2| {
        discount * potential[s2] - potential[s]
    })
}

/// Outcome of [`check_equivalent`]: whether two tables lie in the same
/// equivalence class, and the recovered transform when they do.
#[derive(Debug, Clone)]
pub struct EquivalenceCheck {
    pub equivalent: bool,
    pub recovered: EquivalenceTransform,
    pub max_residual: f64,
}

/// Decide whether `b ≈ λ·a + γΦ(s') − Φ(s)` for some λ > 0 and potential Φ,
/// by linear least squares in (λ, Φ) with a λ ≥ 1e-12 box constraint. The
/// pair is declared equivalent when the max-norm fit residual is ≤ `tol`.
pub fn check_equivalent(
    a: &RewardTable,
    b: &RewardTable,
    discount: f64,
    tol: f64,
) -> Result<EquivalenceCheck> {
    a.shape_matches(b, "check_equivalent")?;
    let fit = shaping_fit::fit_scale_and_potential(
        a.values(),
        b.values(),
        None,
        a.n_states,
        a.n_actions,
        discount,
        1e-12,
    )?;
    let shaped = apply_equivalence(
        a,
        &EquivalenceTransform::new(fit.lambda.max(1e-12), fit.potential.clone())?,
        discount,
    )?;
    let max_residual = shaped
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(EquivalenceCheck {
        equivalent: max_residual <= tol,
        recovered: EquivalenceTransform::new(fit.lambda.max(1e-12), fit.potential)?,
        max_residual,
    })
}

/// Black-box batch reward evaluator over continuous transitions.
///
/// Implementations must be pure: the same batch always yields the same
/// output, so batches may be evaluated concurrently. Inputs are flat
/// row-major arrays of `len × dim` values.
pub trait RewardFunction: Sync {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;

    /// Evaluate a batch of transitions. `out` is cleared and filled with one
    /// reward per transition.
    fn evaluate(&self, states: &[f64], actions: &[f64], next_states: &[f64], out: &mut Vec<f64>);

    fn evaluate_vec(&self, states: &[f64], actions: &[f64], next_states: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        self.evaluate(states, actions, next_states, &mut out);
        out
    }
}

/// Tabular reward exposed as a black box over index-valued states/actions
/// (each encoded as a length-1 vector holding the index).
pub struct IndexedTabularReward {
    table: RewardTable,
}

impl IndexedTabularReward {
    pub fn new(table: RewardTable) -> Self {
        IndexedTabularReward { table }
    }
}

impl RewardFunction for IndexedTabularReward {
    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, states: &[f64], actions: &[f64], next_states: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.reserve(states.len());
        for i in 0..states.len() {
            let s = states[i].round() as usize;
            let a = actions[i].round() as usize;
            let s2 = next_states[i].round() as usize;
            out.push(self.table.get(s, a, s2));
        }
    }
}

/// Tabular reward exposed over one-hot state vectors (actions stay indexed).
/// The one-hot embedding is what a potential network consumes for tabular
/// fixtures, so gradient-based solvers can represent arbitrary potentials.
pub struct OneHotTabularReward {
    table: RewardTable,
}

impl OneHotTabularReward {
    pub fn new(table: RewardTable) -> Self {
        OneHotTabularReward { table }
    }

    fn decode(&self, v: &[f64]) -> usize {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (i, &x) in v.iter().enumerate() {
            if x > best_v {
                best_v = x;
                best = i;
            }
        }
        best
    }
}

impl RewardFunction for OneHotTabularReward {
    fn state_dim(&self) -> usize {
        self.table.n_states()
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, states: &[f64], actions: &[f64], next_states: &[f64], out: &mut Vec<f64>) {
        let d = self.state_dim();
        let n = actions.len();
        out.clear();
        out.reserve(n);
        for i in 0..n {
            let s = self.decode(&states[i * d..(i + 1) * d]);
            let a = actions[i].round() as usize;
            let s2 = self.decode(&next_states[i * d..(i + 1) * d]);
            out.push(self.table.get(s, a, s2));
        }
    }
}

/// Reward defined by a plain function, for tests and custom rewards.
pub struct FnReward<F> {
    state_dim: usize,
    action_dim: usize,
    f: F,
}

impl<F> FnReward<F>
where
    F: Fn(&[f64], &[f64], &[f64]) -> f64 + Sync,
{
    pub fn new(state_dim: usize, action_dim: usize, f: F) -> Self {
        FnReward {
            state_dim,
            action_dim,
            f,
        }
    }
}

impl<F> RewardFunction for FnReward<F>
where
    F: Fn(&[f64], &[f64], &[f64]) -> f64 + Sync,
{
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn action_dim(&self) -> usize {
        self.action_dim
    }

    fn evaluate(&self, states: &[f64], actions: &[f64], next_states: &[f64], out: &mut Vec<f64>) {
        let sd = self.state_dim.max(1);
        let ad = self.action_dim.max(1);
        let n = states.len() / sd;
        out.clear();
        out.reserve(n);
        for i in 0..n {
            out.push((self.f)(
                &states[i * sd..(i + 1) * sd],
                &actions[i * ad..(i + 1) * ad],
                &next_states[i * sd..(i + 1) * sd],
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_table(n_states: usize, n_actions: usize, rng: &mut ChaCha8Rng) -> RewardTable {
        RewardTable::from_fn(n_states, n_actions, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    fn random_potential(n_states: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n_states).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    #[test]
    fn identity_transform_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_table(4, 3, &mut rng);
        let out = apply_equivalence(&r, &EquivalenceTransform::identity(4), 0.99).unwrap();
        assert_eq!(r.values(), out.values());
    }

    #[test]
    fn self_loops_cancel_shaping_at_discount_one() {
        // zero reward, λ=2, Φ(s)=s, γ=1: self-loop entries stay zero
        let r = RewardTable::zeros(2, 1);
        let tf = EquivalenceTransform::new(2.0, vec![0.0, 1.0]).unwrap();
        let out = apply_equivalence(&r, &tf, 1.0).unwrap();
        for s in 0..2 {
            assert_eq!(out.get(s, 0, s), 0.0);
        }
    }

    #[test]
    fn apply_equivalence_matches_scalar_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_table(3, 2, &mut rng);
        let phi = random_potential(3, &mut rng);
        let tf = EquivalenceTransform::new(0.5, phi.clone()).unwrap();
        let discount = 0.99;
        let out = apply_equivalence(&r, &tf, discount).unwrap();
        for s in 0..3 {
            for a in 0..2 {
                for s2 in 0..3 {
                    let want = 0.5 * r.get(s, a, s2) + discount * phi[s2] - phi[s];
                    assert_eq!(out.get(s, a, s2), want);
                }
            }
        }
    }

    #[test]
    fn shaping_constant_potential() {
        // γ=1: constant potential cancels entirely
        let z = shaping_only(&[3.0, 3.0], 1.0, 2).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        // γ=0.99: every entry equals γc − c = −0.01c
        let c = 3.0;
        let t = shaping_only(&[c, c], 0.99, 2).unwrap();
        for &v in t.values() {
            assert!((v - (0.99 * c - c)).abs() < 1e-15);
        }
    }

    #[test]
    fn shaping_matches_scalar_oracle() {
        let phi = [0.0, 1.0, 2.0];
        let t = shaping_only(&phi, 0.99, 2).unwrap();
        for s in 0..3 {
            for a in 0..2 {
                for s2 in 0..3 {
                    assert!((t.get(s, a, s2) - (0.99 * phi[s2] - phi[s])).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn check_equivalent_recovers_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_table(4, 2, &mut rng);
        let phi = random_potential(4, &mut rng);
        let tf = EquivalenceTransform::new(3.0, phi).unwrap();
        let b = apply_equivalence(&r, &tf, 0.99).unwrap();
        let check = check_equivalent(&r, &b, 0.99, 1e-8).unwrap();
        assert!(check.equivalent, "residual {}", check.max_residual);
        assert!((check.recovered.scale() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn check_equivalent_rejects_point_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = random_table(3, 2, &mut rng);
        let mut perturbed = r.values().to_vec();
        perturbed[0] += 1.0;
        let b = RewardTable::new(3, 2, perturbed).unwrap();
        let check = check_equivalent(&r, &b, 0.99, 1e-6).unwrap();
        assert!(!check.equivalent);
    }

    #[test]
    fn check_equivalent_reflexive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = random_table(3, 2, &mut rng);
        let check = check_equivalent(&r, &r, 0.99, 1e-9).unwrap();
        assert!(check.equivalent);
        assert!((check.recovered.scale() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equivalence_relation_symmetry_and_transitivity() {
        // compose two transforms, then check the original and final tables
        // are still recognized as equivalent both ways
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let r = random_table(4, 2, &mut rng);
            let tf1 =
                EquivalenceTransform::new(rng.random_range(0.1..5.0), random_potential(4, &mut rng))
                    .unwrap();
            let tf2 =
                EquivalenceTransform::new(rng.random_range(0.1..5.0), random_potential(4, &mut rng))
                    .unwrap();
            let mid = apply_equivalence(&r, &tf1, 0.99).unwrap();
            let end = apply_equivalence(&mid, &tf2, 0.99).unwrap();
            assert!(check_equivalent(&r, &end, 0.99, 1e-7).unwrap().equivalent);
            assert!(check_equivalent(&end, &r, 0.99, 1e-7).unwrap().equivalent);
        }
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(EquivalenceTransform::new(0.0, vec![0.0]).is_err());
        assert!(EquivalenceTransform::new(-1.0, vec![0.0]).is_err());
    }

    #[test]
    fn indexed_wrapper_matches_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = random_table(5, 3, &mut rng);
        let bb = IndexedTabularReward::new(r.clone());
        let states = [0.0, 4.0, 2.0];
        let actions = [1.0, 2.0, 0.0];
        let nexts = [3.0, 0.0, 2.0];
        let out = bb.evaluate_vec(&states, &actions, &nexts);
        assert_eq!(out[0], r.get(0, 1, 3));
        assert_eq!(out[1], r.get(4, 2, 0));
        assert_eq!(out[2], r.get(2, 0, 2));
    }

    #[test]
    fn one_hot_wrapper_matches_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = random_table(3, 2, &mut rng);
        let bb = OneHotTabularReward::new(r.clone());
        let mut states = vec![0.0; 6];
        let mut nexts = vec![0.0; 6];
        states[2] = 1.0; // s=2
        states[3] = 1.0; // s=0
        nexts[1] = 1.0; // s2=1
        nexts[5] = 1.0; // s2=2
        let out = bb.evaluate_vec(&states, &[1.0, 0.0], &nexts);
        assert_eq!(out[0], r.get(2, 1, 1));
        assert_eq!(out[1], r.get(0, 0, 2));
    }
}
