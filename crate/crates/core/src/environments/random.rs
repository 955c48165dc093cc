//! Random MDP + reward generator for property suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::mdp::TabularMdp;
use crate::reward::RewardTable;

/// Random finite MDP with Dirichlet(1, …, 1) transition rows and i.i.d.
/// uniform rewards in [−1, 1], reproducible by seed.
pub fn random_mdp(
    n_states: usize,
    n_actions: usize,
    discount: f64,
    seed: u64,
) -> (TabularMdp, RewardTable) {
    assert!(n_states >= 2, "random_mdp needs at least 2 states");
    assert!(n_actions >= 1, "random_mdp needs at least 1 action");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
    for _ in 0..n_states * n_actions {
        transition.extend_from_slice(&dirichlet_row(n_states, &mut rng));
    }
    let initial = dirichlet_row(n_states, &mut rng);
    let mdp = TabularMdp::new(n_states, n_actions, transition, initial, discount)
        .expect("generated rows are normalized");
    let reward = RewardTable::from_fn(n_states, n_actions, |_, _, _| rng.random_range(-1.0..1.0))
        .expect("generated rewards are finite");
    (mdp, reward)
}

/// Dirichlet(1, …, 1) draw via normalized exponentials, renormalized so the
/// row sums to 1 exactly enough for validation.
fn dirichlet_row(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n).map(|_| {
        let e: f64 = Exp1.sample(rng);
        e.max(1e-12)
    }).collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    let sum2: f64 = row.iter().sum();
    row[0] += 1.0 - sum2;
    row
}
