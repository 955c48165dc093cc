//! Gradient-descent approximation of the normalized nearest-point distance
//! for black-box rewards.
//!
//! Every iterate of the model `exp(ν)·R_A + c + γΦ_w(s') − Φ_w(s)` stays in
//! `R_A`'s equivalence class, so its direct distance to `R_B` upper-bounds
//! the true unnormalized distance; the reported value is the quotient of the
//! numerator and denominator upper bounds, which can land on either side of
//! the true normalized distance.

use rayon::prelude::*;

use crate::coverage::{TransitionSampler, Transitions};
use crate::distances::seed_stream;
use crate::distances::{DistanceEstimate, Method, SampleInfo};
use crate::error::{Error, Result};
use crate::npec::adam::Adam;
use crate::npec::mlp::TinyMlp;
use crate::npec::{affine_warm_start, LOG_SCALE_FLOOR};
use crate::reward::RewardFunction;
use crate::stats::BootstrapConfig;

#[derive(Debug, Clone)]
pub struct NpecApproxConfig {
    /// Total environment samples consumed by training; the optimizer runs
    /// `total_samples / batch_size` steps.
    pub total_samples: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub warmstart_size: usize,
    pub n_seeds: usize,
    /// Held-out batch used for the upper-bound estimates.
    pub eval_size: usize,
    /// Evaluate (and keep the best bound) every this many steps.
    pub eval_every: usize,
    pub hidden: usize,
    pub seed: u64,
    pub bootstrap: BootstrapConfig,
}

impl Default for NpecApproxConfig {
    fn default() -> Self {
        NpecApproxConfig {
            total_samples: 1_000_000,
            batch_size: 4096,
            learning_rate: 1e-2,
            warmstart_size: 16_386,
            n_seeds: 3,
            eval_size: 16_384,
            eval_every: 16,
            hidden: 32,
            seed: 0,
            bootstrap: BootstrapConfig::default(),
        }
    }
}

/// Approximate normalized nearest-point distance via gradient descent, with
/// a warm-started affine fit and a seed-level bootstrap interval.
pub fn npec_approx_gradient(
    a: &dyn RewardFunction,
    b: &dyn RewardFunction,
    sampler: &dyn TransitionSampler,
    discount: f64,
    config: &NpecApproxConfig,
) -> Result<DistanceEstimate> {
    if config.batch_size == 0 || config.eval_size == 0 {
        return Err(Error::Precondition(
            "batch_size and eval_size must be positive".into(),
        ));
    }
    let per_seed: Vec<Result<f64>> = (0..config.n_seeds)
        .into_par_iter()
        .map(|i| {
            let numerator = estimate_upper_bound(Some(a), b, sampler, discount, config, 2 * i)?;
            let denominator =
                estimate_upper_bound(None, b, sampler, discount, config, 2 * i + 1)?;
            if denominator <= 1e-12 {
                return Ok(0.0);
            }
            Ok(numerator / denominator)
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
        Method::Npec,
        &successes,
        &config.bootstrap,
        SampleInfo {
            n_v: Some(config.total_samples),
            n_m: None,
            episodes: None,
        },
    )
}

/// One gradient-descent run bounding `D^U(source, target)` from above,
/// where `source = R_A` or the zero reward (for the denominator).
fn estimate_upper_bound(
    source: Option<&dyn RewardFunction>,
    target: &dyn RewardFunction,
    sampler: &dyn TransitionSampler,
    discount: f64,
    config: &NpecApproxConfig,
    stream: usize,
) -> Result<f64> {
    let mut rng = seed_stream(config.seed, 0x5EED ^ stream);
    let state_dim = sampler.state_dim();

    // warm start the affine parameters on a dedicated batch
    let warm = sampler.sample_transitions(config.warmstart_size.max(2), &mut rng);
    let target_warm = eval_checked(target, &warm, "warm start")?;
    let (mut nu, mut c) = match source {
        Some(src) => {
            let src_warm = eval_checked(src, &warm, "warm start")?;
            affine_warm_start(&src_warm, &target_warm)?
        }
        None => {
            let mean = target_warm.iter().sum::<f64>() / target_warm.len() as f64;
            (LOG_SCALE_FLOOR.ln(), mean)
        }
    };

    let mut mlp = TinyMlp::new(state_dim, config.hidden, &mut rng);
    let n_mlp = mlp.n_params();
    // flat parameter vector: [ν, c, network weights]
    let mut params = Vec::with_capacity(2 + n_mlp);
    params.push(nu);
    params.push(c);
    params.extend(mlp.params_flat());
    let mut optimizer = Adam::new(params.len(), config.learning_rate);

    let eval_batch = sampler.sample_transitions(config.eval_size, &mut rng);
    let eval_target = eval_checked(target, &eval_batch, "eval")?;
    let eval_source = match source {
        Some(src) => Some(eval_checked(src, &eval_batch, "eval")?),
        None => None,
    };

    let steps = (config.total_samples / config.batch_size).max(1);
    let mut best = evaluate_bound(
        &mlp,
        nu,
        c,
        eval_source.as_deref(),
        &eval_target,
        &eval_batch,
        discount,
    )?;

    let mut grads = vec![0.0; params.len()];
    for step in 0..steps {
        let batch = sampler.sample_transitions(config.batch_size, &mut rng);
        let n = batch.len as f64;
        let target_vals = eval_checked(target, &batch, "training")?;
        let source_vals = match source {
            Some(src) => Some(eval_checked(src, &batch, "training")?),
            None => None,
        };

        let fwd_next = mlp.forward(&batch.next_states);
        let fwd_cur = mlp.forward(&batch.states);
        let phi_next = mlp.outputs(&fwd_next);
        let phi_cur = mlp.outputs(&fwd_cur);

        let scale = nu.exp();
        let mut loss = 0.0;
        let mut grad_nu = 0.0;
        let mut grad_c = 0.0;
        let mut out_grads_next = vec![0.0; batch.len];
        let mut out_grads_cur = vec![0.0; batch.len];
        for i in 0..batch.len {
            let base = source_vals.as_ref().map_or(0.0, |v| scale * v[i]);
            let model = base + c + discount * phi_next[i] - phi_cur[i];
            let err = model - target_vals[i];
            loss += err * err / n;
            let g = 2.0 * err / n;
            grad_nu += g * base; // d(exp(ν)·r)/dν = exp(ν)·r
            grad_c += g;
            out_grads_next[i] = g * discount;
            out_grads_cur[i] = -g;
        }
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                context: "gradient descent loss".into(),
                index: step,
            });
        }

        grads.iter_mut().for_each(|g| *g = 0.0);
        grads[0] = grad_nu;
        grads[1] = grad_c;
        mlp.backward(&fwd_next, &out_grads_next, &mut grads[2..]);
        mlp.backward(&fwd_cur, &out_grads_cur, &mut grads[2..]);

        optimizer.step(&mut params, &grads);
        nu = params[0];
        c = params[1];
        mlp.set_params_flat(&params[2..]);

        if (step + 1) % config.eval_every == 0 || step + 1 == steps {
            let bound = evaluate_bound(
                &mlp,
                nu,
                c,
                eval_source.as_deref(),
                &eval_target,
                &eval_batch,
                discount,
            )?;
            if bound < best {
                best = bound;
            }
        }
    }
    Ok(best)
}

/// Direct L² distance of the current model from the target on the held-out
/// batch; a valid upper bound on the unnormalized distance at any iterate.
fn evaluate_bound(
    mlp: &TinyMlp,
    nu: f64,
    c: f64,
    source: Option<&[f64]>,
    target: &[f64],
    batch: &Transitions,
    discount: f64,
) -> Result<f64> {
    let phi_next = mlp.outputs(&mlp.forward(&batch.next_states)).to_vec();
    let phi_cur = mlp.outputs(&mlp.forward(&batch.states)).to_vec();
    let scale = nu.exp();
    let mut acc = 0.0;
    for i in 0..batch.len {
        let base = source.map_or(0.0, |v| scale * v[i]);
        let model = base + c + discount * phi_next[i] - phi_cur[i];
        let err = model - target[i];
        acc += err * err;
    }
    let value = (acc / batch.len as f64).sqrt();
    if !value.is_finite() {
        return Err(Error::NonFinite {
            context: "upper-bound evaluation".into(),
            index: 0,
        });
    }
    Ok(value)
}

fn eval_checked(
    reward: &dyn RewardFunction,
    batch: &Transitions,
    context: &str,
) -> Result<Vec<f64>> {
    let vals = reward.evaluate_vec(&batch.states, &batch.actions, &batch.next_states);
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("reward evaluation during {context}"),
            index: i,
        });
    }
    Ok(vals)
}
