//! Weighted least-squares fit of `target ≈ λ·base + γΦ(s') − Φ(s)` over a
//! reward tensor, with a lower bound on λ.
//!
//! The shaping design never needs to be materialized: its Gram matrix and
//! projections have closed forms over per-state weight aggregates, leaving an
//! `|S|×|S|` normal-equation system solved through a symmetric
//! eigendecomposition pseudo-inverse. At discount 1 the constant direction of
//! Φ is a null direction; the pseudo-inverse returns the minimum-norm
//! potential. Minimizing first over Φ for fixed λ leaves a one-dimensional
//! convex quadratic in λ, solved in closed form and clamped to the feasible
//! set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub(crate) struct ShapingFit {
    pub lambda: f64,
    pub potential: Vec<f64>,
    /// sqrt of the weighted sum of squared residuals at the optimum.
    pub objective: f64,
}

struct ShapingSystem {
    n_states: usize,
    n_actions: usize,
    discount: f64,
    weights: Vec<f64>,
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
    eig_tol: f64,
}

impl ShapingSystem {
    fn new(weights: Vec<f64>, n_states: usize, n_actions: usize, discount: f64) -> Self {
        // Gram matrix of the shaping columns under the weights:
        //   G[t,u] = Σ_i w_i (γ·1[s2=t] − 1[s=t]) (γ·1[s2=u] − 1[s=u])
        // expressed through source/next weight masses and the (s, s') joint.
        let mut source_mass = vec![0.0; n_states];
        let mut next_mass = vec![0.0; n_states];
        let mut joint = DMatrix::<f64>::zeros(n_states, n_states);
        let mut idx = 0;
        for s in 0..n_states {
            for _a in 0..n_actions {
                for s2 in 0..n_states {
                    let w = weights[idx];
                    if w > 0.0 {
                        source_mass[s] += w;
                        next_mass[s2] += w;
                        joint[(s, s2)] += w;
                    }
                    idx += 1;
                }
            }
        }
        let mut gram = DMatrix::<f64>::zeros(n_states, n_states);
        for t in 0..n_states {
            for u in 0..n_states {
                let mut v = -discount * (joint[(u, t)] + joint[(t, u)]);
                if t == u {
                    v += discount * discount * next_mass[t] + source_mass[t];
                }
                gram[(t, u)] = v;
            }
        }
        let eigen = SymmetricEigen::new(gram);
        let max_eig = eigen.eigenvalues.iter().cloned().fold(0.0, f64::max);
        ShapingSystem {
            n_states,
            n_actions,
            discount,
            weights,
            eigen,
            eig_tol: max_eig * 1e-12,
        }
    }

    /// Minimum-norm Φ minimizing `Σ w·(γΦ(s') − Φ(s) − y)²`.
    fn solve(&self, y: &[f64]) -> Vec<f64> {
        let mut rhs = DVector::<f64>::zeros(self.n_states);
        let mut idx = 0;
        for s in 0..self.n_states {
            for _a in 0..self.n_actions {
                for s2 in 0..self.n_states {
                    let w = self.weights[idx];
                    if w > 0.0 {
                        let wy = w * y[idx];
                        rhs[s2] += self.discount * wy;
                        rhs[s] -= wy;
                    }
                    idx += 1;
                }
            }
        }
        let projected = self.eigen.eigenvectors.transpose() * rhs;
        let mut coeffs = DVector::<f64>::zeros(self.n_states);
        for k in 0..self.n_states {
            let eig = self.eigen.eigenvalues[k];
            if eig > self.eig_tol {
                coeffs[k] = projected[k] / eig;
            }
        }
        let phi = &self.eigen.eigenvectors * coeffs;
        phi.iter().cloned().collect()
    }

    /// Residual vector `√w·(y − (γΦ(s') − Φ(s)))`.
    fn residual(&self, y: &[f64], phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        let mut idx = 0;
        for s in 0..self.n_states {
            for _a in 0..self.n_actions {
                for s2 in 0..self.n_states {
                    let w = self.weights[idx];
                    if w > 0.0 {
                        let shaped = self.discount * phi[s2] - phi[s];
                        out[idx] = w.sqrt() * (y[idx] - shaped);
                    }
                    idx += 1;
                }
            }
        }
        out
    }
}

pub(crate) fn fit_scale_and_potential(
    base: &[f64],
    target: &[f64],
    weights: Option<&[f64]>,
    n_states: usize,
    n_actions: usize,
    discount: f64,
    lambda_min: f64,
) -> Result<ShapingFit> {
    let n = n_states * n_actions * n_states;
    if base.len() != n || target.len() != n {
        return Err(Error::dim(
            format!("{n} entries"),
            format!("{} and {}", base.len(), target.len()),
        ));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::dim(format!("{n} weights"), format!("{}", w.len())));
        }
        if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidDistribution(
                "fit weights must be nonnegative and finite".into(),
            ));
        }
    }
    let weights = weights.map_or_else(|| vec![1.0; n], <[f64]>::to_vec);
    let system = ShapingSystem::new(weights, n_states, n_actions, discount);

    // project base and target onto the orthogonal complement of the shaping
    // span; the optimal λ solves the remaining 1-D quadratic
    let phi_r = system.solve(base);
    let rho_r = system.residual(base, &phi_r);
    let phi_b = system.solve(target);
    let rho_b = system.residual(target, &phi_b);

    let curvature: f64 = rho_r.iter().map(|v| v * v).sum();
    let lambda = if curvature > 1e-300 {
        let cross: f64 = rho_r.iter().zip(&rho_b).map(|(a, b)| a * b).sum();
        (cross / curvature).max(lambda_min)
    } else {
        // base lies in the shaping span: the objective is constant in λ
        lambda_min.max(1.0)
    };

    let adjusted: Vec<f64> = target
        .iter()
        .zip(base)
        .map(|(&t, &r)| t - lambda * r)
        .collect();
    let potential = system.solve(&adjusted);
    let residual = system.residual(&adjusted, &potential);
    let objective = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(ShapingFit {
        lambda,
        potential,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_recovers_parameters() {
        // base 2 states, 1 action; target = 2·base + shaping(Φ=[0,1], γ=0.9)
        let base = vec![0.5, -0.3, 0.2, 0.8];
        let gamma = 0.9;
        let phi = [0.0, 1.0];
        let mut target = vec![0.0; 4];
        let mut k = 0;
        for s in 0..2 {
            for s2 in 0..2 {
                target[k] = 2.0 * base[k] + gamma * phi[s2] - phi[s];
                k += 1;
            }
        }
        let fit = fit_scale_and_potential(&base, &target, None, 2, 1, gamma, 0.0).unwrap();
        assert!((fit.lambda - 2.0).abs() < 1e-10, "lambda {}", fit.lambda);
        assert!(fit.objective < 1e-10, "objective {}", fit.objective);
    }

    #[test]
    fn exact_fit_on_a_larger_instance() {
        // 16 states, 5 actions, potential with a wide range
        let ns = 16;
        let na = 5;
        let gamma = 0.99;
        let phi: Vec<f64> = (0..ns).map(|i| -2.0 * (i as f64 % 7.0)).collect();
        let n = ns * na * ns;
        let mut base = vec![0.0; n];
        let mut target = vec![0.0; n];
        let mut idx = 0;
        for s in 0..ns {
            for a in 0..na {
                for s2 in 0..ns {
                    base[idx] = ((s * 31 + a * 17 + s2 * 7) % 13) as f64 / 13.0 - 0.5;
                    target[idx] = 2.5 * base[idx] + gamma * phi[s2] - phi[s];
                    idx += 1;
                }
            }
        }
        let fit = fit_scale_and_potential(&base, &target, None, ns, na, gamma, 0.0).unwrap();
        assert!((fit.lambda - 2.5).abs() < 1e-9, "lambda {}", fit.lambda);
        assert!(fit.objective < 1e-9, "objective {}", fit.objective);
    }

    #[test]
    fn lambda_clamped_at_lower_bound() {
        // target = −base with no shaping component: best feasible λ is the bound
        let base = vec![1.0, -1.0, 0.5, -0.5];
        let target: Vec<f64> = base.iter().map(|x| -x).collect();
        let fit = fit_scale_and_potential(&base, &target, None, 2, 1, 0.0, 0.0).unwrap();
        assert_eq!(fit.lambda, 0.0);
    }

    #[test]
    fn weighted_rows_with_zero_weight_are_ignored() {
        let base = vec![0.5, -0.3, 0.2, 0.8];
        let mut target = base.clone();
        target[1] += 100.0; // corrupt one entry, then zero its weight
        let weights = vec![0.25, 0.0, 0.5, 0.25];
        let fit = fit_scale_and_potential(&base, &target, Some(&weights), 2, 1, 0.9, 0.0).unwrap();
        assert!((fit.lambda - 1.0).abs() < 1e-9);
        assert!(fit.objective < 1e-10);
    }

    #[test]
    fn discount_one_null_direction_is_handled() {
        // at γ=1 a constant shift of Φ maps to the zero table; the
        // pseudo-inverse must still fit non-constant shaping exactly
        let phi = [0.0, 3.0, -1.0];
        let ns = 3;
        let na = 2;
        let n = ns * na * ns;
        let mut base = vec![0.0; n];
        let mut target = vec![0.0; n];
        let mut idx = 0;
        for s in 0..ns {
            for a in 0..na {
                for s2 in 0..ns {
                    base[idx] = ((s + 2 * a + 3 * s2) % 5) as f64 - 2.0;
                    target[idx] = 0.7 * base[idx] + phi[s2] - phi[s];
                    idx += 1;
                }
            }
        }
        let fit = fit_scale_and_potential(&base, &target, None, ns, na, 1.0, 0.0).unwrap();
        assert!((fit.lambda - 0.7).abs() < 1e-9, "lambda {}", fit.lambda);
        assert!(fit.objective < 1e-9, "objective {}", fit.objective);
    }
}
