//! Episode return correlation: Pearson distance between episode returns.

use crate::distances::estimate::{DistanceEstimate, Method, SampleInfo};
use crate::distances::pearson::pearson_distance;
use crate::error::{Error, Result};
use crate::reward::RewardFunction;
use crate::stats::{bootstrap_ci_statistic, BootstrapConfig};
use crate::trajectory::Trajectory;

/// ERC distance between two rewards on a shared set of episodes, with an
/// episode-level bootstrap confidence interval.
pub fn erc_distance(
    a: &dyn RewardFunction,
    b: &dyn RewardFunction,
    episodes: &[Trajectory],
    discount: f64,
    bootstrap: &BootstrapConfig,
) -> Result<DistanceEstimate> {
    if episodes.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: episodes.len(),
        });
    }
    let returns_a = episode_returns(a, episodes, discount)?;
    let returns_b = episode_returns(b, episodes, discount)?;

    let value = pearson_distance(&returns_a, &returns_b, None).map_err(name_reward)?;

    let stat = |idx: &[usize]| -> Option<f64> {
        let ra: Vec<f64> = idx.iter().map(|&i| returns_a[i]).collect();
        let rb: Vec<f64> = idx.iter().map(|&i| returns_b[i]).collect();
        pearson_distance(&ra, &rb, None).ok()
    };
    let (lo, hi) = bootstrap_ci_statistic(episodes.len(), stat, bootstrap)?;

    Ok(DistanceEstimate::with_bounds(
        Method::Erc,
        value,
        lo,
        hi,
        SampleInfo {
            n_v: None,
            n_m: None,
            episodes: Some(episodes.len()),
        },
    ))
}

/// Discounted return of every episode under one reward.
pub fn episode_returns(
    reward: &dyn RewardFunction,
    episodes: &[Trajectory],
    discount: f64,
) -> Result<Vec<f64>> {
    episodes
        .iter()
        .map(|tr| tr.discounted_return(reward, discount))
        .collect()
}

fn name_reward(err: Error) -> Error {
    match err {
        Error::DegenerateVariance { which } => {
            let reward = if which.contains("first") { "a" } else { "b" };
            Error::DegenerateVariance {
                which: format!("episode returns of reward {reward}"),
            }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward::FnReward;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn index_reward(coeffs: [f64; 3]) -> FnReward<impl Fn(&[f64], &[f64], &[f64]) -> f64 + Sync> {
        FnReward::new(1, 1, move |s: &[f64], a: &[f64], s2: &[f64]| {
            coeffs[0] * s[0] + coeffs[1] * a[0] + coeffs[2] * s2[0]
        })
    }

    fn random_episodes(n: usize, horizon: usize, rng: &mut ChaCha8Rng) -> Vec<Trajectory> {
        (0..n)
            .map(|_| {
                let states: Vec<f64> = (0..=horizon).map(|_| rng.random_range(-2.0..2.0)).collect();
                let actions: Vec<f64> = (0..horizon).map(|_| rng.random_range(-1.0..1.0)).collect();
                Trajectory::new(1, 1, states, actions).unwrap()
            })
            .collect()
    }

    #[test]
    fn identical_rewards_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let episodes = random_episodes(40, 6, &mut rng);
        let r = index_reward([0.4, -1.0, 0.2]);
        let est = erc_distance(&r, &r, &episodes, 0.95, &BootstrapConfig::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.info.episodes, Some(40));
    }

    #[test]
    fn constant_returns_are_degenerate_and_named() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let episodes = random_episodes(10, 4, &mut rng);
        let constant = FnReward::new(1, 1, |_: &[f64], _: &[f64], _: &[f64]| 1.0);
        let varying = index_reward([1.0, 0.0, 0.0]);
        let err =
            erc_distance(&constant, &varying, &episodes, 0.95, &BootstrapConfig::default())
                .unwrap_err();
        match err {
            Error::DegenerateVariance { which } => assert!(which.contains("reward a")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn needs_two_episodes() {
        let r = index_reward([1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let one = random_episodes(1, 3, &mut rng);
        assert!(matches!(
            erc_distance(&r, &r, &one, 0.9, &BootstrapConfig::default()),
            Err(Error::InsufficientData { .. })
        ));
    }
}
