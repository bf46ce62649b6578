use super::config::{NetworkConfig, UpdaterKind};
use super::matrix::Matrix;
use super::network::{Dense, Gradients, LayerGrad};
use crate::error::{Error, Result};

/// Epsilon for rmsprop and adam.
pub const UPDATER_EPSILON: f64 = 1e-8;

/// Accumulators for one parameter group (a weight matrix or a bias vector),
/// stored flat in the parameter's own order.
#[derive(Debug, Clone, PartialEq)]
pub struct Slots {
    pub velocity: Vec<f64>,
    pub sq_grad: Vec<f64>,
    pub sq_update: Vec<f64>,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl Slots {
    pub fn zeros(n: usize) -> Self {
        Self {
            velocity: vec![0.0; n],
            sq_grad: vec![0.0; n],
            sq_update: vec![0.0; n],
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
        }
    }

    fn len(&self) -> usize {
        self.velocity.len()
    }

    fn all_finite(&self) -> bool {
        [
            &self.velocity,
            &self.sq_grad,
            &self.sq_update,
            &self.first_moment,
            &self.second_moment,
        ]
        .iter()
        .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSlots {
    pub weights: Slots,
    pub biases: Slots,
}

/// Per-parameter updater state plus the shared step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdaterState {
    pub layers: Vec<LayerSlots>,
    pub t: u64,
}

impl UpdaterState {
    pub fn for_layers(layers: &[Dense]) -> Self {
        Self {
            layers: layers
                .iter()
                .map(|l| LayerSlots {
                    weights: Slots::zeros(l.weights.as_slice().len()),
                    biases: Slots::zeros(l.biases.len()),
                })
                .collect(),
            t: 0,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.all_finite() && l.biases.all_finite())
    }
}

fn step_group(kind: UpdaterKind, slots: &mut Slots, g: &[f64], lr: f64, t: u64, cfg: &NetworkConfig) -> Vec<f64> {
    let mut delta = vec![0.0; g.len()];
    match kind {
        UpdaterKind::Nesterov => {
            let mu = cfg.momentum;
            for i in 0..g.len() {
                slots.velocity[i] = mu * slots.velocity[i] - lr * g[i];
                delta[i] = slots.velocity[i];
            }
        }
        UpdaterKind::Adadelta => {
            let (rho, eps) = (cfg.adadelta_rho, cfg.adadelta_epsilon);
            for i in 0..g.len() {
                slots.sq_grad[i] = rho * slots.sq_grad[i] + (1.0 - rho) * g[i] * g[i];
                let d = -((slots.sq_update[i] + eps).sqrt() / (slots.sq_grad[i] + eps).sqrt()) * g[i];
                slots.sq_update[i] = rho * slots.sq_update[i] + (1.0 - rho) * d * d;
                delta[i] = d;
            }
        }
        UpdaterKind::RmsProp => {
            let decay = cfg.rmsprop_decay;
            for i in 0..g.len() {
                slots.sq_grad[i] = decay * slots.sq_grad[i] + (1.0 - decay) * g[i] * g[i];
                delta[i] = -lr * g[i] / (slots.sq_grad[i] + UPDATER_EPSILON).sqrt();
            }
        }
        UpdaterKind::Adam => {
            let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
            let c1 = 1.0 - b1.powf(t as f64);
            let c2 = 1.0 - b2.powf(t as f64);
            for i in 0..g.len() {
                slots.first_moment[i] = b1 * slots.first_moment[i] + (1.0 - b1) * g[i];
                slots.second_moment[i] = b2 * slots.second_moment[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = slots.first_moment[i] / c1;
                let v_hat = slots.second_moment[i] / c2;
                delta[i] = -lr * m_hat / (v_hat.sqrt() + UPDATER_EPSILON);
            }
        }
    }
    delta
}

/// One updater step: advances `state` and returns the parameter deltas.
///
/// Weights use `learning_rate`, biases `bias_learning_rate`. For nesterov the
/// caller is expected to have taken `grads` at the lookahead point.
pub fn updater_step(state: &mut UpdaterState, grads: &Gradients, cfg: &NetworkConfig) -> Result<Gradients> {
    if state.layers.len() != grads.layers.len() {
        return Err(Error::Shape(format!(
            "updater state has {} layers, gradients have {}",
            state.layers.len(),
            grads.layers.len()
        )));
    }
    for (l, (s, g)) in state.layers.iter().zip(&grads.layers).enumerate() {
        if s.weights.len() != g.weights.as_slice().len() || s.biases.len() != g.biases.len() {
            return Err(Error::Shape(format!("updater state shape mismatch at layer {l}")));
        }
        let finite = g.weights.as_slice().iter().chain(&g.biases).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Numeric(format!("non-finite gradient in layer {l}")));
        }
    }
    state.t += 1;
    let t = state.t;
    let layers = state
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .map(|(s, g)| {
            let w = step_group(
                cfg.updater,
                &mut s.weights,
                g.weights.as_slice(),
                cfg.learning_rate,
                t,
                cfg,
            );
            let b = step_group(cfg.updater, &mut s.biases, &g.biases, cfg.bias_learning_rate, t, cfg);
            LayerGrad {
                weights: Matrix::from_vec(g.weights.rows(), g.weights.cols(), w),
                biases: b,
            }
        })
        .collect();
    Ok(Gradients { layers })
}

/// Adds `scale * delta` to every parameter.
pub(crate) fn apply_deltas(layers: &mut [Dense], delta: &Gradients, scale: f64) {
    for (layer, d) in layers.iter_mut().zip(&delta.layers) {
        for (p, v) in layer.weights.as_mut_slice().iter_mut().zip(d.weights.as_slice()) {
            *p += scale * v;
        }
        for (p, v) in layer.biases.iter_mut().zip(&d.biases) {
            *p += scale * v;
        }
    }
}

/// Current velocities, shaped like the parameters.
pub(crate) fn velocities(state: &UpdaterState, layers: &[Dense]) -> Gradients {
    Gradients {
        layers: state
            .layers
            .iter()
            .zip(layers)
            .map(|(s, l)| LayerGrad {
                weights: Matrix::from_vec(l.fan_out(), l.fan_in(), s.weights.velocity.clone()),
                biases: s.biases.velocity.clone(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(g: f64) -> (UpdaterState, Gradients) {
        let layers = vec![Dense {
            weights: Matrix::zeros(1, 1),
            biases: vec![0.0],
        }];
        let state = UpdaterState::for_layers(&layers);
        let grads = Gradients {
            layers: vec![LayerGrad {
                weights: Matrix::from_vec(1, 1, vec![g]),
                biases: vec![g],
            }],
        };
        (state, grads)
    }

    fn cfg(updater: UpdaterKind) -> NetworkConfig {
        NetworkConfig {
            updater,
            ..NetworkConfig::default()
        }
    }

    #[test]
    fn nesterov_without_momentum_is_sgd() {
        let (mut s, g) = single(0.7);
        let c = NetworkConfig {
            momentum: 0.0,
            ..cfg(UpdaterKind::Nesterov)
        };
        let d = updater_step(&mut s, &g, &c).unwrap();
        assert!((d.layers[0].weights[(0, 0)] - (-0.1 * 0.7)).abs() < 1e-15);
        assert!((d.layers[0].biases[0] - (-0.01 * 0.7)).abs() < 1e-15);
    }

    #[test]
    fn nesterov_accumulates_velocity() {
        let (mut s, g) = single(1.0);
        let c = cfg(UpdaterKind::Nesterov);
        updater_step(&mut s, &g, &c).unwrap();
        let d = updater_step(&mut s, &g, &c).unwrap();
        assert!((d.layers[0].weights[(0, 0)] - (0.9 * -0.1 - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step() {
        let (mut s, g) = single(1.0);
        let d = updater_step(&mut s, &g, &cfg(UpdaterKind::Adam)).unwrap();
        assert!((d.layers[0].weights[(0, 0)] + 0.1 / (1.0 + 1e-8)).abs() < 1e-9);
        assert!((d.layers[0].biases[0] + 0.01 / (1.0 + 1e-8)).abs() < 1e-9);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn adadelta_first_step() {
        let (mut s, g) = single(1.0);
        let d = updater_step(&mut s, &g, &cfg(UpdaterKind::Adadelta)).unwrap();
        let expect = -(1e-6f64).sqrt() / (1.0 + 1e-6f64).sqrt();
        assert!((d.layers[0].weights[(0, 0)] - expect).abs() < 1e-9);
        // Rates are ignored.
        assert_eq!(d.layers[0].weights[(0, 0)], d.layers[0].biases[0]);
    }

    #[test]
    fn rmsprop_first_step() {
        let (mut s, g) = single(2.0);
        let d = updater_step(&mut s, &g, &cfg(UpdaterKind::RmsProp)).unwrap();
        let expect = -0.1 * 2.0 / (0.05 * 4.0 + 1e-8f64).sqrt();
        assert!((d.layers[0].weights[(0, 0)] - expect).abs() < 1e-12);
    }

    #[test]
    fn non_finite_gradient_names_layer() {
        let (mut s, g) = single(f64::NAN);
        match updater_step(&mut s, &g, &cfg(UpdaterKind::Adam)) {
            Err(Error::Numeric(m)) => assert!(m.contains("layer 0")),
            other => panic!("{other:?}"),
        }
        assert_eq!(s.t, 0);
    }
}
