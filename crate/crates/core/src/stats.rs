//! Distribution-free percentile bootstrap confidence intervals.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Configuration for percentile bootstrap intervals.
#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    /// Two-sided confidence level in (0, 1).
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 10_000,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Precondition(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.n_resamples == 0 {
            return Err(Error::Precondition("n_resamples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Percentile bootstrap interval for the mean of `samples`.
///
/// Deterministic given the seed: each resample draws with its own RNG stream
/// derived from the seed and resample index, so parallel execution cannot
/// reorder the results.
pub fn bootstrap_ci(samples: &[f64], config: &BootstrapConfig) -> Result<(f64, f64)> {
    config.validate()?;
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len();
    let stats: Vec<f64> = (0..config.n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = resample_rng(config.seed, i);
            let mut acc = 0.0;
            for _ in 0..n {
                acc += samples[rng.random_range(0..n)];
            }
            acc / n as f64
        })
        .collect();
    Ok(percentile_interval(stats, config.level))
}

/// Percentile bootstrap for an arbitrary statistic computed from resampled
/// item indices. The statistic may return `None` for a degenerate resample
/// (for example, a constant-return episode draw); such resamples are skipped.
pub fn bootstrap_ci_statistic<F>(
    n_items: usize,
    statistic: F,
    config: &BootstrapConfig,
) -> Result<(f64, f64)>
where
    F: Fn(&[usize]) -> Option<f64> + Sync,
{
    config.validate()?;
    if n_items < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: n_items,
        });
    }
    let stats: Vec<f64> = (0..config.n_resamples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = resample_rng(config.seed, i);
            let idx: Vec<usize> = (0..n_items).map(|_| rng.random_range(0..n_items)).collect();
            statistic(&idx)
        })
        .collect();
    if stats.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: stats.len(),
        });
    }
    Ok(percentile_interval(stats, config.level))
}

fn resample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    // golden-ratio stride keeps per-resample streams decorrelated
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn percentile_interval(mut stats: Vec<f64>, level: f64) -> (f64, f64) {
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    (quantile(&stats, alpha), quantile(&stats, 1.0 - alpha))
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}
