use rand::Rng;

use super::config::{Activation, NetworkConfig};
use super::matrix::Matrix;
use super::updater::UpdaterState;
use crate::error::{Error, Result};
use crate::rng::{self, keys};

/// Probability floor applied before taking logs in the loss.
pub const LOG_FLOOR: f64 = 1e-12;

/// One affine layer: `weights` is `fan_out × fan_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn fan_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.rows()
    }
}

/// Layered feedforward classifier with a softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Dense>,
    pub config: NetworkConfig,
    pub state: UpdaterState,
}

/// Xavier/Glorot normal: mean 0, variance `2 / (fan_in + fan_out)`.
pub fn xavier_init<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Matrix {
    let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
    Matrix::from_fn(fan_out, fan_in, |_, _| std * rng::standard_normal(rng))
}

impl Network {
    /// Fresh network for `layer_sizes = [d_in, hidden.., n_classes]`.
    ///
    /// Layer `l` draws its weights from substream `(seed, NETWORK_INIT, l)`;
    /// every bias starts at `config.bias_init`.
    pub fn new(layer_sizes: &[usize], config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        if layer_sizes.len() < 3 {
            return Err(Error::Config(format!(
                "need at least input, one hidden and output layer, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must be positive, got {layer_sizes:?}"
            )));
        }
        let layers: Vec<Dense> = layer_sizes
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let mut rng = rng::substream(config.seed, keys::NETWORK_INIT, l as u64);
                Dense {
                    weights: xavier_init(w[0], w[1], &mut rng),
                    biases: vec![config.bias_init; w[1]],
                }
            })
            .collect();
        let state = UpdaterState::for_layers(&layers);
        Ok(Self { layers, config, state })
    }

    /// Builds a network from explicit parameters (fresh updater state).
    pub fn from_layers(layers: Vec<Dense>, config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        if layers.len() < 2 {
            return Err(Error::Config("need at least two layers".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].fan_out() != pair[1].fan_in() {
                return Err(Error::Shape(format!(
                    "layer {l} outputs {} but layer {} expects {}",
                    pair[0].fan_out(),
                    l + 1,
                    pair[1].fan_in()
                )));
            }
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.biases.len() != layer.fan_out() {
                return Err(Error::Shape(format!("layer {l} bias length mismatch")));
            }
        }
        let state = UpdaterState::for_layers(&layers);
        Ok(Self { layers, config, state })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].fan_in()];
        sizes.extend(self.layers.iter().map(Dense::fan_out));
        sizes
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().map_or(0, Dense::fan_out)
    }

    pub fn forward(&self, batch: &Matrix) -> Result<Forward> {
        forward_layers(&self.layers, self.config.hidden_activation, batch)
    }

    pub fn parameters_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.as_slice().iter().all(|v| v.is_finite()) && l.biases.iter().all(|v| v.is_finite()))
    }
}

/// Everything backprop needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub input: Matrix,
    /// Pre-activations of every layer, output layer last.
    pub pre_activations: Vec<Matrix>,
    /// Post-activation outputs of the hidden layers.
    pub hidden: Vec<Matrix>,
    pub probs: Matrix,
}

/// Numerically stable softmax: `exp(z_i - max z) / sum_j exp(z_j - max z)`.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mean multi-class cross-entropy `-log p[i, y_i]` with a 1e-12 floor.
pub fn mcxent_loss(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    if probs.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} probability rows for {} labels",
            probs.rows(),
            labels.len()
        )));
    }
    if probs.rows() == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= probs.cols() {
            return Err(Error::Shape(format!("label {y} outside {} classes", probs.cols())));
        }
        total -= probs[(i, y)].max(LOG_FLOOR).ln();
    }
    Ok(total / labels.len() as f64)
}

pub(crate) fn forward_layers(layers: &[Dense], activation: Activation, batch: &Matrix) -> Result<Forward> {
    let d_in = layers[0].fan_in();
    if batch.cols() != d_in {
        return Err(Error::Shape(format!(
            "batch has {} columns, network expects {d_in}",
            batch.cols()
        )));
    }
    let last = layers.len() - 1;
    let mut pre_activations = Vec::with_capacity(layers.len());
    let mut hidden = Vec::with_capacity(last);
    for (l, layer) in layers.iter().enumerate() {
        let input = if l == 0 { batch } else { &hidden[l - 1] };
        let mut z = input.mul_transpose(&layer.weights);
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&layer.biases) {
                *v += b;
            }
        }
        if l < last {
            let mut a = z.clone();
            a.map_inplace(|v| activation.apply(v));
            hidden.push(a);
        }
        pre_activations.push(z);
    }
    let logits = &pre_activations[last];
    let mut probs = Matrix::zeros(logits.rows(), logits.cols());
    for r in 0..logits.rows() {
        probs.row_mut(r).copy_from_slice(&softmax(logits.row(r)));
    }
    Ok(Forward {
        input: batch.clone(),
        pre_activations,
        hidden,
        probs,
    })
}

/// Gradient of one layer's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

/// Per-layer gradients (or parameter deltas, which share the shape).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(layers: &[Dense]) -> Self {
        Self {
            layers: layers
                .iter()
                .map(|l| LayerGrad {
                    weights: Matrix::zeros(l.fan_out(), l.fan_in()),
                    biases: vec![0.0; l.fan_out()],
                })
                .collect(),
        }
    }

    /// L2 norm over every weight and bias entry.
    pub fn global_norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|g| g.weights.sum_of_squares() + g.biases.iter().map(|b| b * b).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.layers {
            g.weights.map_inplace(|v| v * factor);
            g.biases.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

/// Backpropagation for mean cross-entropy over the batch.
///
/// The output delta uses the softmax + cross-entropy simplification
/// `(probs - onehot) / n`.
pub fn backward(layers: &[Dense], activation: Activation, fwd: &Forward, labels: &[usize]) -> Result<Gradients> {
    let n = fwd.probs.rows();
    if labels.len() != n {
        return Err(Error::Shape(format!("{n} forward rows for {} labels", labels.len())));
    }
    let c = fwd.probs.cols();
    let mut delta = fwd.probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        if y >= c {
            return Err(Error::Shape(format!("label {y} outside {c} classes")));
        }
        delta[(i, y)] -= 1.0;
    }
    let inv_n = 1.0 / n as f64;
    delta.map_inplace(|v| v * inv_n);

    let mut grads = Vec::with_capacity(layers.len());
    for l in (0..layers.len()).rev() {
        let input = if l == 0 { &fwd.input } else { &fwd.hidden[l - 1] };
        let weights = delta.transpose_mul(input);
        let mut biases = vec![0.0; delta.cols()];
        for r in 0..delta.rows() {
            for (b, v) in biases.iter_mut().zip(delta.row(r)) {
                *b += v;
            }
        }
        grads.push(LayerGrad { weights, biases });
        if l > 0 {
            let mut prev = delta.mul(&layers[l].weights);
            let z = &fwd.pre_activations[l - 1];
            for (p, &zv) in prev.as_mut_slice().iter_mut().zip(z.as_slice()) {
                *p *= activation.derivative(zv);
            }
            delta = prev;
        }
    }
    grads.reverse();
    Ok(Gradients { layers: grads })
}

/// Rescales `grads` so their global L2 norm is at most `threshold`.
pub fn clip_by_norm(grads: &mut Gradients, threshold: f64) {
    let norm = grads.global_norm();
    if norm > threshold {
        grads.scale(threshold / norm);
    }
}
