//! EPIC: Pearson distance between canonically shaped rewards under a
//! coverage distribution, exactly for tables and by sampling for black
//! boxes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::canonical::{canonicalize_exact, canonicalize_sampled};
use crate::coverage::{TabularCoverage, TransitionSampler};
use crate::distances::estimate::{DistanceEstimate, Method, SampleInfo};
use crate::distances::pearson::pearson_distance;
use crate::error::{Error, Result};
use crate::reward::{RewardFunction, RewardTable};
use crate::stats::BootstrapConfig;

/// Exact EPIC distance between two reward tables.
///
/// Both rewards are canonicalized under the coverage marginals, then
/// compared by Pearson distance weighted by the joint `D`. Errors if either
/// canonical reward is constant under `D` (for example the zero reward).
pub fn epic_exact(
    a: &RewardTable,
    b: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
) -> Result<f64> {
    a.shape_matches(b, "epic_exact")?;
    dist.shape_matches(a.n_states(), a.n_actions())?;
    let ca = canonicalize_exact(a, dist, discount)?;
    let cb = canonicalize_exact(b, dist, discount)?;
    pearson_distance(
        ca.values().values(),
        cb.values().values(),
        Some(dist.joint()),
    )
}

/// Configuration of the sample-based EPIC path.
#[derive(Debug, Clone)]
pub struct SampledEpicConfig {
    /// Transitions drawn from `D` per seed.
    pub n_v: usize,
    /// `D_S × D_A` samples used for the canonicalization means.
    pub n_m: usize,
    pub n_seeds: usize,
    pub seed: u64,
    pub bootstrap: BootstrapConfig,
}

impl Default for SampledEpicConfig {
    fn default() -> Self {
        SampledEpicConfig {
            n_v: 32_768,
            n_m: 32_768,
            n_seeds: 30,
            seed: 0,
            bootstrap: BootstrapConfig::default(),
        }
    }
}

impl SampledEpicConfig {
    /// The abbreviated low-precision setting.
    pub fn quick() -> Self {
        SampledEpicConfig {
            n_v: 4096,
            n_m: 4096,
            n_seeds: 3,
            ..Default::default()
        }
    }
}

/// Sample-based EPIC between black-box rewards.
///
/// Each seed draws one batch from `D` and one from `D_S × D_A`, shared by
/// both rewards, canonicalizes on demand, and takes the Pearson distance.
/// Seeds run in parallel with independent RNG streams; seeds whose Pearson
/// computation degenerates are reported as failures and at least two must
/// succeed.
pub fn epic_sampled(
    a: &dyn RewardFunction,
    b: &dyn RewardFunction,
    sampler: &dyn TransitionSampler,
    discount: f64,
    config: &SampledEpicConfig,
) -> Result<DistanceEstimate> {
    if config.n_v < 2 || config.n_m < 1 {
        return Err(Error::Precondition(
            "sampled EPIC needs n_v >= 2 and n_m >= 1".into(),
        ));
    }
    let per_seed: Vec<Result<f64>> = (0..config.n_seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed_stream(config.seed, i);
            let batch_v = sampler.sample_transitions(config.n_v, &mut rng);
            let (m_states, m_actions) = sampler.sample_state_action(config.n_m, &mut rng);
            let ca = canonicalize_sampled(a, &batch_v, &m_states, &m_actions, discount)?;
            let cb = canonicalize_sampled(b, &batch_v, &m_states, &m_actions, discount)?;
            pearson_distance(&ca, &cb, None)
        })
        .collect();

    let successes: Vec<f64> = per_seed.iter().filter_map(|r| r.as_ref().ok()).copied().collect();
    if successes.len() < 2 {
        return match per_seed.into_iter().find_map(|r| r.err()) {
            Some(e) => Err(e),
            None => Err(Error::InsufficientData {
                needed: 2,
                got: successes.len(),
            }),
        };
    }
    DistanceEstimate::from_seed_values(
        Method::Epic,
        &successes,
        &config.bootstrap,
        SampleInfo {
            n_v: Some(config.n_v),
            n_m: Some(config.n_m),
            episodes: None,
        },
    )
}

pub(crate) fn seed_stream(base: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base ^ (index as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03))
}
