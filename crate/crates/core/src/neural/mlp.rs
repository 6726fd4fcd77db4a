use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NeuralError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Tanh,
    Relu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    /// Strictly positive output head (circuit-parameter networks).
    Softplus,
    /// Raw linear output (direct regression baselines).
    Linear,
}

#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Fully connected network with a flat parameter vector (weights row-major
/// per layer, then biases), so optimizers see one contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    hidden: Activation,
    output: OutputKind,
    params: Vec<f64>,
}

/// Intermediate activations kept for backpropagation.
pub struct ForwardCache {
    /// Input and post-activation of every layer, length n_layers + 1.
    activations: Vec<Vec<f64>>,
    /// Pre-activations per layer.
    pre: Vec<Vec<f64>>,
    /// Dropout keep-masks (already inverted-scaled), when used.
    masks: Option<Vec<Vec<f64>>>,
}

impl Mlp {
    pub fn new(
        sizes: Vec<usize>,
        hidden: Activation,
        output: OutputKind,
        seed: u64,
    ) -> Result<Self, NeuralError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NeuralError::Usage(
                "need at least input and output layer sizes, all positive".into(),
            ));
        }
        let n = Self::param_count_for(&sizes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; n];
        let mut off = 0;
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let scale = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut params[off..off + fan_in * fan_out] {
                *w = rng.random_range(-scale..scale);
            }
            off += fan_in * fan_out + fan_out; // biases stay zero
        }
        Ok(Self {
            sizes,
            hidden,
            output,
            params,
        })
    }

    pub fn from_parts(
        sizes: Vec<usize>,
        hidden: Activation,
        output: OutputKind,
        params: Vec<f64>,
    ) -> Result<Self, NeuralError> {
        if params.len() != Self::param_count_for(&sizes) {
            return Err(NeuralError::Usage(format!(
                "parameter vector length {} does not match layer sizes",
                params.len()
            )));
        }
        Ok(Self {
            sizes,
            hidden,
            output,
            params,
        })
    }

    fn param_count_for(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Exact learnable-scalar count: Σ (in·out + out).
    pub fn count_params(&self) -> usize {
        self.params.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_kind(&self) -> OutputKind {
        self.output
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn weights(&self, l: usize) -> (&[f64], &[f64]) {
        let off = (0..l)
            .map(|i| self.sizes[i] * self.sizes[i + 1] + self.sizes[i + 1])
            .sum::<usize>();
        let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = &self.params[off..off + fan_in * fan_out];
        let b = &self.params[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
        (w, b)
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NeuralError> {
        if x.len() != self.sizes[0] {
            return Err(NeuralError::Usage(format!(
                "input length {} does not match input layer {}",
                x.len(),
                self.sizes[0]
            )));
        }
        Ok(())
    }

    /// Forward pass. `dropout` optionally supplies (rate, rng) for
    /// inverted dropout on hidden activations during training.
    pub fn forward_cached(
        &self,
        x: &[f64],
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<(Vec<f64>, ForwardCache), NeuralError> {
        self.check_input(x)?;
        let n_layers = self.sizes.len() - 1;
        let mut activations = Vec::with_capacity(n_layers + 1);
        let mut pre = Vec::with_capacity(n_layers);
        activations.push(x.to_vec());
        let (rate, mut rng) = match dropout {
            Some((r, rng)) => (r, Some(rng)),
            None => (0.0, None),
        };
        let mut masks: Option<Vec<Vec<f64>>> = if rng.is_some() {
            Some(Vec::new())
        } else {
            None
        };
        for l in 0..n_layers {
            let (w, b) = self.weights(l);
            let fan_in = self.sizes[l];
            let fan_out = self.sizes[l + 1];
            let input = activations.last().unwrap();
            let mut z = vec![0.0; fan_out];
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let mut acc = b[o];
                for (wi, xi) in row.iter().zip(input) {
                    acc += wi * xi;
                }
                z[o] = acc;
            }
            let is_output = l == n_layers - 1;
            let mut a: Vec<f64> = if is_output {
                match self.output {
                    OutputKind::Softplus => z.iter().map(|&v| softplus(v)).collect(),
                    OutputKind::Linear => z.clone(),
                }
            } else {
                match self.hidden {
                    Activation::Tanh => z.iter().map(|v| v.tanh()).collect(),
                    Activation::Relu => z.iter().map(|v| v.max(0.0)).collect(),
                }
            };
            if !is_output {
                if let Some(rng) = rng.as_deref_mut() {
                    let keep = 1.0 - rate;
                    let mask: Vec<f64> = (0..fan_out)
                        .map(|_| {
                            if rng.random::<f64>() < keep {
                                1.0 / keep
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    for (ai, mi) in a.iter_mut().zip(&mask) {
                        *ai *= mi;
                    }
                    masks.as_mut().unwrap().push(mask);
                }
            }
            pre.push(z);
            activations.push(a);
        }
        let out = activations.last().unwrap().clone();
        Ok((
            out,
            ForwardCache {
                activations,
                pre,
                masks,
            },
        ))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        Ok(self.forward_cached(x, None)?.0)
    }

    /// Reverse accumulation. `d_output` is dLoss/d(post-activation output);
    /// returns the gradient congruent to the flat parameter vector.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_output: &[f64],
    ) -> Result<Vec<f64>, NeuralError> {
        let n_layers = self.sizes.len() - 1;
        if d_output.len() != self.sizes[n_layers] {
            return Err(NeuralError::Usage(
                "upstream gradient length mismatch".into(),
            ));
        }
        let mut grad = vec![0.0; self.params.len()];
        // delta on the output layer's pre-activation
        let mut delta: Vec<f64> = match self.output {
            OutputKind::Softplus => cache.pre[n_layers - 1]
                .iter()
                .zip(d_output)
                .map(|(z, d)| d * sigmoid(*z))
                .collect(),
            OutputKind::Linear => d_output.to_vec(),
        };
        for l in (0..n_layers).rev() {
            let fan_in = self.sizes[l];
            let fan_out = self.sizes[l + 1];
            let off = (0..l)
                .map(|i| self.sizes[i] * self.sizes[i + 1] + self.sizes[i + 1])
                .sum::<usize>();
            let input = &cache.activations[l];
            // weight and bias gradients
            for o in 0..fan_out {
                let g_row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                let d = delta[o];
                for (gi, xi) in g_row.iter_mut().zip(input) {
                    *gi += d * xi;
                }
            }
            for o in 0..fan_out {
                grad[off + fan_in * fan_out + o] += delta[o];
            }
            if l == 0 {
                break;
            }
            // propagate to the previous layer's post-activation
            let (w, _) = self.weights(l);
            let mut d_prev = vec![0.0; fan_in];
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let d = delta[o];
                for (dp, wi) in d_prev.iter_mut().zip(row) {
                    *dp += d * wi;
                }
            }
            if let Some(masks) = &cache.masks {
                for (dp, m) in d_prev.iter_mut().zip(&masks[l - 1]) {
                    *dp *= m;
                }
            }
            // through the hidden activation of layer l-1
            delta = match self.hidden {
                Activation::Tanh => cache.pre[l - 1]
                    .iter()
                    .zip(&d_prev)
                    .map(|(z, d)| d * (1.0 - z.tanh().powi(2)))
                    .collect(),
                Activation::Relu => cache.pre[l - 1]
                    .iter()
                    .zip(&d_prev)
                    .map(|(z, d)| if *z > 0.0 { *d } else { 0.0 })
                    .collect(),
            };
        }
        Ok(grad)
    }
}
