use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DROPOUT_RATE: f64 = 0.2;
pub const LOSS_EPSILON: f64 = 1e-7;

/// Largest double below one.
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy with the score clamped to [ε, 1 − ε].
pub fn loss(score: f64, label: f64) -> f64 {
    let s = score.clamp(LOSS_EPSILON, 1.0 - LOSS_EPSILON);
    -(label * s.ln() + (1.0 - label) * (1.0 - s).ln())
}

/// Fully connected layer; `weights[i * output + j]` maps input i to output j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Self {
        Dense {
            input,
            output,
            weights: vec![0.0; input * output],
            bias: vec![0.0; output],
        }
    }

    /// Uniform ±sqrt(6 / (fan_in + fan_out)) weights, zero bias.
    pub fn glorot<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (input + output) as f64).sqrt();
        let weights = (0..input * output)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        Dense {
            input,
            output,
            weights,
            bias: vec![0.0; output],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.weights[i * self.output..(i + 1) * self.output];
            for (o, w) in out.iter_mut().zip(row) {
                *o += xi * w;
            }
        }
        out
    }
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of each dense layer after dropout.
    pub inputs: Vec<Vec<f64>>,
    /// Inverted dropout multipliers per layer; `None` outside training.
    pub masks: Vec<Option<Vec<f64>>>,
    /// Pre-activations of each dense layer.
    pub pre: Vec<Vec<f64>>,
    pub score: f64,
}

/// Fusion head: ReLU hidden layers and a single sigmoid output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub dropout: f64,
}

impl Mlp {
    pub fn new<R: Rng>(input: usize, hidden: &[usize], dropout: f64, rng: &mut R) -> Self {
        let widths = Self::widths(input, hidden);
        let layers = widths
            .windows(2)
            .map(|w| Dense::glorot(w[0], w[1], rng))
            .collect();
        Mlp { layers, dropout }
    }

    pub fn zeros(input: usize, hidden: &[usize], dropout: f64) -> Self {
        let widths = Self::widths(input, hidden);
        let layers = widths
            .windows(2)
            .map(|w| Dense::zeros(w[0], w[1]))
            .collect();
        Mlp { layers, dropout }
    }

    fn widths(input: usize, hidden: &[usize]) -> Vec<usize> {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(1);
        widths
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input
    }

    /// Inverted dropout multipliers for every layer input.
    pub fn sample_masks<R: Rng>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        let keep = 1.0 - self.dropout;
        self.layers
            .iter()
            .map(|l| {
                (0..l.input)
                    .map(|_| {
                        if rng.random::<f64>() < self.dropout {
                            0.0
                        } else {
                            1.0 / keep
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn forward<R: Rng>(
        &self,
        input: &[f64],
        train_mode: bool,
        rng: &mut R,
    ) -> Result<ForwardCache> {
        let masks = (train_mode && self.dropout > 0.0).then(|| self.sample_masks(rng));
        self.forward_with_masks(input, masks)
    }

    pub fn forward_with_masks(
        &self,
        input: &[f64],
        masks: Option<Vec<Vec<f64>>>,
    ) -> Result<ForwardCache> {
        if input.len() != self.input_width() {
            return Err(Error::ShapeMismatch {
                expected: self.input_width(),
                actual: input.len(),
            });
        }
        let n = self.layers.len();
        let mut masks: Vec<Option<Vec<f64>>> = match masks {
            Some(m) => m.into_iter().map(Some).collect(),
            None => vec![None; n],
        };
        masks.resize(n, None);
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(n),
            masks,
            pre: Vec::with_capacity(n),
            score: 0.0,
        };
        let mut x = input.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            if let Some(mask) = &cache.masks[l] {
                x.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
            }
            let z = layer.apply(&x);
            cache.inputs.push(x);
            x = if l + 1 < n {
                z.iter().map(|v| v.max(0.0)).collect()
            } else {
                Vec::new()
            };
            cache.pre.push(z);
        }
        cache.score = sigmoid(cache.pre[n - 1][0]).clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP);
        Ok(cache)
    }

    /// Inference score, dropout off.
    pub fn score(&self, input: &[f64]) -> Result<f64> {
        Ok(self.forward_with_masks(input, None)?.score)
    }

    /// Adds `scale · ∂loss/∂θ` into `grads` (weights then bias, per layer)
    /// and returns `scale · ∂loss/∂input`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        label: f64,
        scale: f64,
        grads: &mut [Vec<f64>],
    ) -> Vec<f64> {
        let mut delta = vec![(cache.score - label) * scale];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let x = &cache.inputs[l];
            let (gw, rest) = grads[2 * l..].split_at_mut(1);
            let (gw, gb) = (&mut gw[0], &mut rest[0]);
            for (g, d) in gb.iter_mut().zip(&delta) {
                *g += d;
            }
            let mut dx = vec![0.0; layer.input];
            for i in 0..layer.input {
                let row = i * layer.output;
                let mut acc = 0.0;
                for (j, d) in delta.iter().enumerate() {
                    gw[row + j] += x[i] * d;
                    acc += layer.weights[row + j] * d;
                }
                dx[i] = acc;
            }
            if let Some(mask) = &cache.masks[l] {
                dx.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
            }
            if l == 0 {
                return dx;
            }
            delta = dx
                .iter()
                .zip(&cache.pre[l - 1])
                .map(|(d, z)| if *z > 0.0 { *d } else { 0.0 })
                .collect();
        }
        unreachable!("an Mlp has at least one layer")
    }

    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.layers
            .iter()
            .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
            .collect()
    }
}
