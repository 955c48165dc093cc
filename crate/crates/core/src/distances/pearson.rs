//! Weighted Pearson distance `√(1 − ρ)/√2`.
//!
//! Computed through standardized scores as `½·‖Z(x) − Z(y)‖₂`, which is
//! algebraically the same quantity but keeps self-distance at exactly zero
//! and symmetry bit-exact, instead of amplifying rounding through
//! `√(1 − ρ)`.

use crate::error::{Error, Result};

/// Pearson distance between two vectors under optional probability weights.
///
/// `weights` must be nonnegative with positive total mass; `None` means
/// uniform. Errors if the vectors differ in length, are shorter than 2, or
/// either is constant under the weights.
pub fn pearson_distance(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim(
            format!("vectors of equal length ({})", x.len()),
            format!("{}", y.len()),
        ));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    if let Some(w) = weights {
        if w.len() != x.len() {
            return Err(Error::dim(
                format!("{} weights", x.len()),
                format!("{}", w.len()),
            ));
        }
        if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidDistribution(
                "pearson weights must be nonnegative and finite".into(),
            ));
        }
    }

    let total = match weights {
        Some(w) => {
            let t: f64 = w.iter().sum();
            if t <= 0.0 {
                return Err(Error::InvalidDistribution(
                    "pearson weights have zero total mass".into(),
                ));
            }
            t
        }
        None => x.len() as f64,
    };
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]) / total;

    let (mu_x, sd_x) = moments(x, &weight, "first argument")?;
    let (mu_y, sd_y) = moments(y, &weight, "second argument")?;

    let mut sq = 0.0;
    for i in 0..x.len() {
        let zx = (x[i] - mu_x) / sd_x;
        let zy = (y[i] - mu_y) / sd_y;
        let d = zx - zy;
        sq += weight(i) * d * d;
    }
    Ok((0.5 * sq.sqrt()).clamp(0.0, 1.0))
}

fn moments(
    v: &[f64],
    weight: &impl Fn(usize) -> f64,
    which: &str,
) -> Result<(f64, f64)> {
    let mut mean = 0.0;
    let mut meansq = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let w = weight(i);
        mean += w * x;
        meansq += w * x * x;
    }
    let mut var = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let d = x - mean;
        var += weight(i) * d * d;
    }
    // relative degeneracy threshold: constant inputs produce variance at the
    // level of rounding noise, scaled by the squared magnitude
    if var <= 1e-24 * (meansq + f64::MIN_POSITIVE) {
        return Err(Error::DegenerateVariance {
            which: which.to_string(),
        });
    }
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn self_distance_is_zero() {
        let x = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(pearson_distance(&x, &x, None).unwrap(), 0.0);
    }

    #[test]
    fn negation_gives_one() {
        let x = [1.0, -2.0, 0.5, 3.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let d = pearson_distance(&x, &y, None).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_transform_gives_zero() {
        let x = [1.0, -2.0, 0.5, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 7.0).collect();
        let d = pearson_distance(&x, &y, None).unwrap();
        assert!(d < 1e-9);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let x = [2.0, 2.0, 2.0];
        let y = [1.0, 0.0, -1.0];
        let err = pearson_distance(&x, &y, None).unwrap_err();
        match err {
            Error::DegenerateVariance { which } => assert!(which.contains("first")),
            other => panic!("unexpected error {other}"),
        }
        let err = pearson_distance(&y, &x, None).unwrap_err();
        match err {
            Error::DegenerateVariance { which } => assert!(which.contains("second")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn weighted_ignores_zero_weight_entries() {
        let x = [1.0, -1.0, 100.0];
        let y = [2.0, -2.0, -55.0];
        let w = [0.5, 0.5, 0.0];
        let d = pearson_distance(&x, &y, Some(&w)).unwrap();
        assert!(d < 1e-9, "x and y are affinely related on the support");
    }

    #[test]
    fn weights_must_be_valid() {
        let x = [1.0, 2.0];
        assert!(pearson_distance(&x, &x, Some(&[-0.1, 1.1])).is_err());
        assert!(pearson_distance(&x, &x, Some(&[0.0, 0.0])).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            xs in prop::collection::vec(-100.0f64..100.0, 3..20),
            ys in prop::collection::vec(-100.0f64..100.0, 3..20),
        ) {
            let n = xs.len().min(ys.len());
            let x = &xs[..n];
            let y = &ys[..n];
            if let (Ok(d1), Ok(d2)) = (pearson_distance(x, y, None), pearson_distance(y, x, None)) {
                prop_assert_eq!(d1, d2);
                prop_assert!((0.0..=1.0).contains(&d1));
            }
        }

        #[test]
        fn affine_invariance(
            xs in prop::collection::vec(-10.0f64..10.0, 4..16),
            a in 0.1f64..10.0,
            b in 0.1f64..10.0,
            c in -5.0f64..5.0,
            d in -5.0f64..5.0,
        ) {
            let ys: Vec<f64> = xs.iter().rev().cloned().collect();
            let xs2: Vec<f64> = xs.iter().map(|v| a * v + c).collect();
            let ys2: Vec<f64> = ys.iter().map(|v| b * v + d).collect();
            if let (Ok(d1), Ok(d2)) = (
                pearson_distance(&xs, &ys, None),
                pearson_distance(&xs2, &ys2, None),
            ) {
                prop_assert!((d1 - d2).abs() < 1e-12);
            }
        }

        #[test]
        fn triangle_inequality(
            xs in prop::collection::vec(-10.0f64..10.0, 5..12),
            ys in prop::collection::vec(-10.0f64..10.0, 5..12),
            zs in prop::collection::vec(-10.0f64..10.0, 5..12),
        ) {
            let n = xs.len().min(ys.len()).min(zs.len());
            let (x, y, z) = (&xs[..n], &ys[..n], &zs[..n]);
            if let (Ok(dxz), Ok(dxy), Ok(dyz)) = (
                pearson_distance(x, z, None),
                pearson_distance(x, y, None),
                pearson_distance(y, z, None),
            ) {
                prop_assert!(dxz <= dxy + dyz + 1e-9);
            }
        }
    }
}
