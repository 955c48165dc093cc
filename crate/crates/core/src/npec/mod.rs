//! Nearest point in equivalence class: how far is `R_B` from the closest
//! reward equivalent to `R_A`, in direct L^p distance, normalized by the
//! distance from the zero-reward class.
//!
//! The tabular p = 2 case reduces to weighted linear least squares over
//! `(λ ≥ 0, Φ)`. The p = 1 case is supported on shaping-null coverage
//! (undiscounted self-loop support), where only the scale matters and the
//! piecewise-linear objective is minimized exactly over its breakpoints.

mod adam;
mod approx;
mod mlp;

pub use adam::Adam;
pub use approx::{npec_approx_gradient, NpecApproxConfig};
pub use mlp::TinyMlp;

use crate::coverage::{TabularCoverage, Transitions};
use crate::error::{Error, Result};
use crate::reward::{RewardFunction, RewardTable};
use crate::shaping_fit;

/// Scale floor substituted when an optimal scale of exactly zero must be
/// represented in log space.
pub const LOG_SCALE_FLOOR: f64 = 1e-6;

/// Parameters of a reward modeled inside `R_A`'s equivalence class:
/// `exp(ν)·R_A + c + γΦ(s') − Φ(s)`.
#[derive(Debug, Clone)]
pub struct NpecModel {
    pub log_scale: f64,
    pub offset: f64,
    pub potential: PotentialParams,
}

#[derive(Debug, Clone)]
pub enum PotentialParams {
    Table(Vec<f64>),
    Network(TinyMlp),
}

impl NpecModel {
    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }
}

/// Exact unnormalized distance `inf over R' ≡ R_A of direct_p(R', R_B)` for
/// the least-squares case p = 2, together with the minimizing model.
///
/// The infimum over λ > 0 equals the minimum over λ ≥ 0 by continuity, so
/// the solver works on the closed constraint. A boundary solution λ = 0 is
/// reported through the model with `log_scale = ln(1e-6)`.
pub fn npec_unnormalized_exact(
    a: &RewardTable,
    b: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
    p: f64,
) -> Result<(f64, NpecModel)> {
    a.shape_matches(b, "npec_unnormalized_exact")?;
    dist.shape_matches(a.n_states(), a.n_actions())?;
    if (p - 2.0).abs() > 1e-12 {
        return Err(Error::Precondition(
            "the exact unnormalized solver supports p = 2 only".into(),
        ));
    }
    let fit = shaping_fit::fit_scale_and_potential(
        a.values(),
        b.values(),
        Some(dist.joint()),
        a.n_states(),
        a.n_actions(),
        discount,
        0.0,
    )?;
    let model = NpecModel {
        log_scale: fit.lambda.max(LOG_SCALE_FLOOR).ln(),
        offset: 0.0,
        potential: PotentialParams::Table(fit.potential),
    };
    Ok((fit.objective, model))
}

/// Normalized distance `D^U(R_A, R_B) / D^U(0, R_B)`, defined as 0 when the
/// denominator vanishes (every policy is optimal for rewards equivalent to
/// zero). Supports p = 2 exactly; p = 1 on shaping-null coverage.
pub fn npec_normalized(
    a: &RewardTable,
    b: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
    p: f64,
) -> Result<f64> {
    let zero = RewardTable::zeros(a.n_states(), a.n_actions());
    let (num, den) = if (p - 2.0).abs() <= 1e-12 {
        let (num, _) = npec_unnormalized_exact(a, b, dist, discount, 2.0)?;
        let (den, _) = npec_unnormalized_exact(&zero, b, dist, discount, 2.0)?;
        (num, den)
    } else if (p - 1.0).abs() <= 1e-12 {
        let num = npec_unnormalized_scale_only_l1(a, b, dist, discount)?;
        let den = npec_unnormalized_scale_only_l1(&zero, b, dist, discount)?;
        (num, den)
    } else {
        return Err(Error::Precondition(format!(
            "normalized distance supports p = 1 or p = 2, got {p}"
        )));
    };
    let b_scale = dist
        .joint()
        .iter()
        .zip(b.values())
        .map(|(&w, &v)| w * v.abs())
        .sum::<f64>();
    if den <= 1e-12 * b_scale.max(1.0) {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// Unnormalized L^1 distance minimized over the scale only. Requires every
/// supported transition to be a self-loop at discount 1, where potential
/// shaping contributes nothing and the infimum over λ > 0 of the convex
/// piecewise-linear objective is attained at a breakpoint or at 0.
fn npec_unnormalized_scale_only_l1(
    a: &RewardTable,
    b: &RewardTable,
    dist: &TabularCoverage,
    discount: f64,
) -> Result<f64> {
    if (discount - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(
            "the p = 1 path requires discount 1 (shaping-null support)".into(),
        ));
    }
    let ns = dist.n_states();
    let na = dist.n_actions();
    let mut base = Vec::new();
    let mut target = Vec::new();
    let mut weights = Vec::new();
    let mut idx = 0;
    for s in 0..ns {
        for a_idx in 0..na {
            for s2 in 0..ns {
                let w = dist.joint()[idx];
                if w > 0.0 {
                    if s2 != s {
                        return Err(Error::Precondition(
                            "the p = 1 path requires self-loop-only coverage support".into(),
                        ));
                    }
                    base.push(a.get(s, a_idx, s2));
                    target.push(b.get(s, a_idx, s2));
                    weights.push(w);
                }
                idx += 1;
            }
        }
    }
    let objective = |lambda: f64| -> f64 {
        base.iter()
            .zip(&target)
            .zip(&weights)
            .map(|((&x, &y), &w)| w * (lambda * x - y).abs())
            .sum()
    };
    let mut best = objective(0.0);
    for (&x, &y) in base.iter().zip(&target) {
        if x != 0.0 {
            let breakpoint = y / x;
            if breakpoint > 0.0 {
                best = best.min(objective(breakpoint));
            }
        }
    }
    Ok(best)
}

/// Constrained affine warm start: `argmin over λ ≥ 0, c of E(λx + c − y)²`,
/// returned as `(ν₀ = ln λ*, c₀)` with λ* = 0 mapped to `ln(1e-6)`.
pub fn affine_warm_start(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InsufficientData {
            needed: 1,
            got: x.len().min(y.len()),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        cov += (xi - mean_x) * (yi - mean_y);
        var += (xi - mean_x) * (xi - mean_x);
    }
    // single-bound active set: clamp the unconstrained optimum at zero
    let lambda = if var > 0.0 { (cov / var).max(0.0) } else { 0.0 };
    let c = mean_y - lambda * mean_x;
    Ok((lambda.max(LOG_SCALE_FLOOR).ln(), c))
}

/// Warm start computed from black-box evaluations on a transition batch.
pub fn npec_warm_start(
    a: &dyn RewardFunction,
    b: &dyn RewardFunction,
    batch: &Transitions,
) -> Result<(f64, f64)> {
    let xa = a.evaluate_vec(&batch.states, &batch.actions, &batch.next_states);
    let xb = b.evaluate_vec(&batch.states, &batch.actions, &batch.next_states);
    affine_warm_start(&xa, &xb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward::{apply_equivalence, shaping_only, EquivalenceTransform};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_table(ns: usize, na: usize, rng: &mut ChaCha8Rng) -> RewardTable {
        RewardTable::from_fn(ns, na, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    /// Uniform coverage over the two self-loops of a 2-state single-action
    /// space, the shaping-null fixture used throughout the L^1 tests.
    fn selfloop_coverage() -> TabularCoverage {
        let mut joint = vec![0.0; 4];
        joint[0] = 0.5;
        joint[3] = 0.5;
        TabularCoverage::from_joint(2, 1, joint).unwrap()
    }

    #[test]
    fn identical_rewards_have_zero_unnormalized_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_table(4, 2, &mut rng);
        let cov = TabularCoverage::uniform(4, 2);
        let (d, model) = npec_unnormalized_exact(&r, &r, &cov, 0.99, 2.0).unwrap();
        assert!(d < 1e-10);
        assert!((model.scale() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn equivalent_rewards_have_zero_unnormalized_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let ns = rng.random_range(2..6);
            let na = rng.random_range(1..4);
            let r = random_table(ns, na, &mut rng);
            let tf = EquivalenceTransform::new(
                rng.random_range(0.1..5.0),
                (0..ns).map(|_| rng.random_range(-2.0..2.0)).collect(),
            )
            .unwrap();
            let b = apply_equivalence(&r, &tf, 0.99).unwrap();
            let cov = TabularCoverage::uniform(ns, na);
            let (d, _) = npec_unnormalized_exact(&r, &b, &cov, 0.99, 2.0).unwrap();
            assert!(d < 1e-10, "distance {d}");
        }
    }

    #[test]
    fn counterexample_pair_is_asymmetric() {
        // binary states, self-loop coverage, undiscounted, p = 1:
        // R_A(s) = 2s against R_B ≡ 1 gives unnormalized ½ one way, 1 the
        // other, and both denominators are 1
        let cov = selfloop_coverage();
        let ra = RewardTable::from_fn(2, 1, |s, _, _| 2.0 * s as f64).unwrap();
        let rb = RewardTable::from_fn(2, 1, |_, _, _| 1.0).unwrap();
        let zero = RewardTable::zeros(2, 1);
        let du_ab = npec_unnormalized_scale_only_l1(&ra, &rb, &cov, 1.0).unwrap();
        let du_ba = npec_unnormalized_scale_only_l1(&rb, &ra, &cov, 1.0).unwrap();
        let du_0a = npec_unnormalized_scale_only_l1(&zero, &ra, &cov, 1.0).unwrap();
        let du_0b = npec_unnormalized_scale_only_l1(&zero, &rb, &cov, 1.0).unwrap();
        assert!((du_ab - 0.5).abs() < 1e-15);
        assert!((du_ba - 1.0).abs() < 1e-15);
        assert!((du_0a - 1.0).abs() < 1e-15);
        assert!((du_0b - 1.0).abs() < 1e-15);
        let npec_ab = npec_normalized(&ra, &rb, &cov, 1.0, 1.0).unwrap();
        let npec_ba = npec_normalized(&rb, &ra, &cov, 1.0, 1.0).unwrap();
        assert!((npec_ab - 0.5).abs() < 1e-15);
        assert!((npec_ba - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shaping_only_target_hits_zero_denominator_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ns = 3;
        let na = 2;
        let phi: Vec<f64> = (0..ns).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b = shaping_only(&phi, 0.99, na).unwrap();
        let a = random_table(ns, na, &mut rng);
        let cov = TabularCoverage::uniform(ns, na);
        let d = npec_normalized(&a, &b, &cov, 0.99, 2.0).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn normalized_invariant_under_equivalence_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let ns = rng.random_range(2..5);
            let na = rng.random_range(1..3);
            let a = random_table(ns, na, &mut rng);
            let b = random_table(ns, na, &mut rng);
            let cov = TabularCoverage::uniform(ns, na);
            let base = npec_normalized(&a, &b, &cov, 0.99, 2.0).unwrap();
            let tf_a = EquivalenceTransform::new(
                rng.random_range(0.2..4.0),
                (0..ns).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let tf_b = EquivalenceTransform::new(
                rng.random_range(0.2..4.0),
                (0..ns).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let a2 = apply_equivalence(&a, &tf_a, 0.99).unwrap();
            let b2 = apply_equivalence(&b, &tf_b, 0.99).unwrap();
            let transformed = npec_normalized(&a2, &b2, &cov, 0.99, 2.0).unwrap();
            assert!(
                (base - transformed).abs() < 1e-9,
                "base {base} vs transformed {transformed}"
            );
        }
    }

    #[test]
    fn unnormalized_scales_in_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let ns = rng.random_range(2..5);
            let na = rng.random_range(1..3);
            let a = random_table(ns, na, &mut rng);
            let b = random_table(ns, na, &mut rng);
            let cov = TabularCoverage::uniform(ns, na);
            let lambda: f64 = rng.random_range(0.1..4.0);
            let scaled = RewardTable::from_fn(ns, na, |s, ac, s2| lambda * b.get(s, ac, s2)).unwrap();
            let (d1, _) = npec_unnormalized_exact(&a, &b, &cov, 0.99, 2.0).unwrap();
            let (d2, _) = npec_unnormalized_exact(&a, &scaled, &cov, 0.99, 2.0).unwrap();
            assert!((d2 - lambda * d1).abs() < 1e-9, "{d2} vs λ·{d1}");
        }
    }

    #[test]
    fn unnormalized_bounded_by_distance_from_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let ns = rng.random_range(2..5);
            let na = rng.random_range(1..3);
            let a = random_table(ns, na, &mut rng);
            let b = random_table(ns, na, &mut rng);
            let zero = RewardTable::zeros(ns, na);
            let cov = TabularCoverage::uniform(ns, na);
            let (dab, _) = npec_unnormalized_exact(&a, &b, &cov, 0.99, 2.0).unwrap();
            let (d0b, _) = npec_unnormalized_exact(&zero, &b, &cov, 0.99, 2.0).unwrap();
            assert!(dab <= d0b + 1e-9);
        }
    }

    #[test]
    fn solver_returns_a_local_minimum() {
        // random perturbations of the returned (λ, Φ) never decrease the
        // weighted objective
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let ns = rng.random_range(2..5);
            let na = rng.random_range(1..3);
            let a = random_table(ns, na, &mut rng);
            let b = random_table(ns, na, &mut rng);
            let cov = TabularCoverage::uniform(ns, na);
            let (d, model) = npec_unnormalized_exact(&a, &b, &cov, 0.99, 2.0).unwrap();
            let phi = match &model.potential {
                PotentialParams::Table(t) => t.clone(),
                _ => unreachable!(),
            };
            // the model floors exp(ν) at 1e-6 to stay inside the class; undo
            // the floor when the solver hit the λ = 0 boundary
            let lambda = if model.scale() <= LOG_SCALE_FLOOR {
                0.0
            } else {
                model.scale()
            };
            let objective = |lam: f64, phi: &[f64]| -> f64 {
                let mut acc = 0.0;
                let mut idx = 0;
                for s in 0..ns {
                    for ac in 0..na {
                        for s2 in 0..ns {
                            let m = lam * a.get(s, ac, s2) + 0.99 * phi[s2] - phi[s];
                            let r = m - b.get(s, ac, s2);
                            acc += cov.joint()[idx] * r * r;
                            idx += 1;
                        }
                    }
                }
                acc.sqrt()
            };
            let base = objective(lambda, &phi);
            assert!((base - d).abs() < 1e-9);
            for _ in 0..10 {
                let mut dir: Vec<f64> = (0..=ns).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                for v in &mut dir {
                    *v *= 1e-3 / norm;
                }
                let lam2 = (lambda + dir[0]).max(0.0);
                let phi2: Vec<f64> = phi.iter().zip(&dir[1..]).map(|(p, d)| p + d).collect();
                assert!(objective(lam2, &phi2) >= base - 1e-12);
            }
        }
    }

    #[test]
    fn warm_start_recovers_affine_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 2.0).collect();
        let (nu, c) = affine_warm_start(&x, &y).unwrap();
        assert!((nu.exp() - 3.0).abs() < 1e-8);
        assert!((c - 2.0).abs() < 1e-8);
    }

    #[test]
    fn warm_start_clamps_negative_scale_at_zero() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let (nu, _) = affine_warm_start(&x, &y).unwrap();
        assert_eq!(nu, LOG_SCALE_FLOOR.ln());
    }

    #[test]
    fn warm_start_matches_grid_search_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let x: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (nu, c) = affine_warm_start(&x, &y).unwrap();
            let lambda = nu.exp();
            let sse = |lam: f64, cc: f64| -> f64 {
                x.iter()
                    .zip(&y)
                    .map(|(&xi, &yi)| {
                        let e = lam * xi + cc - yi;
                        e * e
                    })
                    .sum::<f64>()
            };
            // nested 2-D grid refinement around the best point so far
            let (mut bl, mut bc) = (1.5f64, 0.0f64);
            let mut halfwidth = 3.0;
            for _ in 0..14 {
                let mut best = (bl, bc, f64::INFINITY);
                let k = 20;
                for li in 0..=k {
                    for ci in 0..=k {
                        let lam = (bl - halfwidth
                            + 2.0 * halfwidth * li as f64 / k as f64)
                            .max(0.0);
                        let cc = bc - halfwidth + 2.0 * halfwidth * ci as f64 / k as f64;
                        let v = sse(lam, cc);
                        if v < best.2 {
                            best = (lam, cc, v);
                        }
                    }
                }
                bl = best.0;
                bc = best.1;
                halfwidth *= 0.2;
            }
            // the warm start floors λ at 1e-6 before taking the log
            let expected = bl.max(LOG_SCALE_FLOOR);
            assert!((lambda - expected).abs() < 1e-6, "λ {lambda} vs oracle {bl}");
            assert!((c - bc).abs() < 1e-6, "c {c} vs oracle {bc}");
        }
    }
}
