//! Minimal feed-forward network with hand-written reverse-mode gradients,
//! used as the potential function in gradient-based equivalence search.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Fully-connected tanh network with a linear scalar output.
#[derive(Debug, Clone)]
pub struct TinyMlp {
    /// Layer sizes from input to output, e.g. `[in, 32, 32, 1]`.
    sizes: Vec<usize>,
    /// Per layer: row-major `[out × in]` weights.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl TinyMlp {
    /// Xavier-uniform initialization for hidden layers, deterministic given
    /// the RNG state. The output layer starts at zero so the network is the
    /// zero function initially and the affine warm start is exact.
    pub fn new(input_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let sizes = vec![input_dim, hidden, hidden, 1];
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let last = l == sizes.len() - 2;
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| if last { 0.0 } else { rng.random_range(-limit..limit) })
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        TinyMlp {
            sizes,
            weights,
            biases,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) {
        let mut k = 0;
        for l in 0..self.weights.len() {
            let wlen = self.weights[l].len();
            self.weights[l].copy_from_slice(&params[k..k + wlen]);
            k += wlen;
            let blen = self.biases[l].len();
            self.biases[l].copy_from_slice(&params[k..k + blen]);
            k += blen;
        }
        debug_assert_eq!(k, params.len());
    }

    /// Forward pass over a flat row-major batch; returns one scalar per row
    /// plus the per-layer activations needed for the backward pass.
    pub fn forward(&self, inputs: &[f64]) -> MlpForward {
        let n = inputs.len() / self.sizes[0];
        let mut activations = vec![inputs.to_vec()];
        for l in 0..self.weights.len() {
            let (din, dout) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &activations[l];
            let mut cur = vec![0.0; n * dout];
            let last = l == self.weights.len() - 1;
            for i in 0..n {
                for o in 0..dout {
                    let mut acc = self.biases[l][o];
                    let wrow = &self.weights[l][o * din..(o + 1) * din];
                    let xin = &prev[i * din..(i + 1) * din];
                    for (w, x) in wrow.iter().zip(xin) {
                        acc += w * x;
                    }
                    cur[i * dout + o] = if last { acc } else { acc.tanh() };
                }
            }
            activations.push(cur);
        }
        MlpForward { activations }
    }

    /// Scalar outputs of a forward pass.
    pub fn outputs<'a>(&self, fwd: &'a MlpForward) -> &'a [f64] {
        fwd.activations.last().unwrap()
    }

    /// Accumulate parameter gradients for `Σ_i out_grads[i]·output_i` into
    /// `grads` (flat layout matching [`Self::params_flat`]).
    pub fn backward(&self, fwd: &MlpForward, out_grads: &[f64], grads: &mut [f64]) {
        let n_layers = self.weights.len();
        let n = out_grads.len();
        // delta for the output layer (linear): just the incoming gradients
        let mut delta: Vec<f64> = out_grads.to_vec();
        // walk backwards accumulating weight/bias gradients
        let mut offsets = Vec::with_capacity(n_layers);
        let mut k = 0;
        for l in 0..n_layers {
            offsets.push(k);
            k += self.weights[l].len() + self.biases[l].len();
        }
        for l in (0..n_layers).rev() {
            let (din, dout) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &fwd.activations[l];
            let base = offsets[l];
            for i in 0..n {
                for o in 0..dout {
                    let d = delta[i * dout + o];
                    if d == 0.0 {
                        continue;
                    }
                    let wbase = base + o * din;
                    let xin = &prev[i * din..(i + 1) * din];
                    for (j, &x) in xin.iter().enumerate() {
                        grads[wbase + j] += d * x;
                    }
                    grads[base + dout * din + o] += d;
                }
            }
            if l > 0 {
                // propagate through the tanh of the previous layer
                let mut next_delta = vec![0.0; n * din];
                for i in 0..n {
                    for o in 0..dout {
                        let d = delta[i * dout + o];
                        if d == 0.0 {
                            continue;
                        }
                        let wrow = &self.weights[l][o * din..(o + 1) * din];
                        for (j, &w) in wrow.iter().enumerate() {
                            next_delta[i * din + j] += d * w;
                        }
                    }
                }
                // tanh'(z) = 1 − tanh(z)², and activations store tanh(z)
                let prev_act = &fwd.activations[l];
                for (nd, &a) in next_delta.iter_mut().zip(prev_act.iter()) {
                    *nd *= 1.0 - a * a;
                }
                delta = next_delta;
            }
        }
    }
}

pub struct MlpForward {
    activations: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn loss_and_grad(mlp: &TinyMlp, inputs: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
        let fwd = mlp.forward(inputs);
        let outs = mlp.outputs(&fwd);
        let n = targets.len() as f64;
        let loss = outs
            .iter()
            .zip(targets)
            .map(|(o, t)| (o - t) * (o - t))
            .sum::<f64>()
            / n;
        let out_grads: Vec<f64> = outs
            .iter()
            .zip(targets)
            .map(|(o, t)| 2.0 * (o - t) / n)
            .collect();
        let mut grads = vec![0.0; mlp.n_params()];
        mlp.backward(&fwd, &out_grads, &mut grads);
        (loss, grads)
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = TinyMlp::new(3, 8, &mut rng);
        let x = [0.1, -0.2, 0.3, 0.5, 0.5, -0.5];
        let a = mlp.outputs(&mlp.forward(&x)).to_vec();
        let b = mlp.outputs(&mlp.forward(&x)).to_vec();
        assert_eq!(a, b);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..20 {
            let input_dim = 1 + (trial % 3);
            let mut mlp = TinyMlp::new(input_dim, 8, &mut rng);
            // randomize every parameter, including the zero-initialized
            // output layer, so all gradient paths are exercised
            let random_params: Vec<f64> = (0..mlp.n_params())
                .map(|_| rng.random_range(-0.7..0.7))
                .collect();
            mlp.set_params_flat(&random_params);
            let batch = 4;
            let inputs: Vec<f64> = (0..batch * input_dim)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, analytic) = loss_and_grad(&mlp, &inputs, &targets);
            let params = mlp.params_flat();
            let h = 1e-5;
            for _ in 0..12 {
                let k = rng.random_range(0..params.len());
                let mut p_plus = params.clone();
                p_plus[k] += h;
                mlp.set_params_flat(&p_plus);
                let (lp, _) = loss_and_grad(&mlp, &inputs, &targets);
                let mut p_minus = params.clone();
                p_minus[k] -= h;
                mlp.set_params_flat(&p_minus);
                let (lm, _) = loss_and_grad(&mlp, &inputs, &targets);
                mlp.set_params_flat(&params);
                let numeric = (lp - lm) / (2.0 * h);
                let denom = analytic[k].abs().max(numeric.abs()).max(1e-3);
                let rel = (analytic[k] - numeric).abs() / denom;
                assert!(
                    rel < 1e-5,
                    "param {k}: analytic {} vs numeric {numeric} (rel {rel})",
                    analytic[k]
                );
            }
        }
    }
}
