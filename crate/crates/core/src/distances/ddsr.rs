//! Direct L^p distance and its standardized variant (DDSR).

use crate::canonical::canonicalize_exact;
use crate::coverage::TabularCoverage;
use crate::error::{Error, Result};
use crate::reward::RewardTable;

/// Direct distance: the `L^p` norm of the pointwise difference under `D`,
/// `(E_D |R_A − R_B|^p)^{1/p}`.
pub fn direct_distance_lp(
    a: &RewardTable,
    b: &RewardTable,
    dist: &TabularCoverage,
    p: f64,
) -> Result<f64> {
    a.shape_matches(b, "direct_distance_lp")?;
    dist.shape_matches(a.n_states(), a.n_actions())?;
    check_power(p)?;
    let mut acc = 0.0;
    for (i, &w) in dist.joint().iter().enumerate() {
        if w > 0.0 {
            acc += w * (a.values()[i] - b.values()[i]).abs().powf(p);
        }
    }
    Ok(acc.powf(1.0 / p))
}

/// Distance between standardized rewards: canonicalize, center under `D`,
/// normalize to unit `L^p` norm, then take half the direct distance. With
/// `p = 2` this coincides with EPIC.
pub fn ddsr_distance(
    a: &RewardTable,
    b: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
    p: f64,
) -> Result<f64> {
    a.shape_matches(b, "ddsr_distance")?;
    dist.shape_matches(a.n_states(), a.n_actions())?;
    check_power(p)?;
    let sa = standardize(a, dist, discount, p, "first argument")?;
    let sb = standardize(b, dist, discount, p, "second argument")?;
    let mut acc = 0.0;
    for (i, &w) in dist.joint().iter().enumerate() {
        if w > 0.0 {
            acc += w * (sa[i] - sb[i]).abs().powf(p);
        }
    }
    Ok(0.5 * acc.powf(1.0 / p))
}

fn standardize(
    r: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
    p: f64,
    which: &str,
) -> Result<Vec<f64>> {
    let canon = canonicalize_exact(r, dist, discount)?;
    let values = canon.values().values();
    let w = dist.joint();
    // the sampled canonicalization path drops a constant, so re-center under
    // D explicitly before normalizing
    let mean: f64 = w.iter().zip(values).map(|(&wi, &v)| wi * v).sum();
    let mut norm_acc = 0.0;
    let mut meansq = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        if wi > 0.0 {
            norm_acc += wi * (values[i] - mean).abs().powf(p);
            meansq += wi * values[i] * values[i];
        }
    }
    let norm = norm_acc.powf(1.0 / p);
    if norm <= 1e-12 * (meansq.sqrt() + f64::MIN_POSITIVE).max(1e-150) {
        return Err(Error::DegenerateVariance {
            which: format!("{which} (zero-norm canonical reward)"),
        });
    }
    Ok(values.iter().map(|&v| (v - mean) / norm).collect())
}

fn check_power(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("norm power must be >= 1, got {p}")))
    }
}
