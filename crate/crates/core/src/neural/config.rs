use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdaterKind {
    #[default]
    Nesterov,
    Adadelta,
    RmsProp,
    Adam,
}

impl fmt::Display for UpdaterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdaterKind::Nesterov => "nesterov",
            UpdaterKind::Adadelta => "adadelta",
            UpdaterKind::RmsProp => "rmsprop",
            UpdaterKind::Adam => "adam",
        })
    }
}

impl FromStr for UpdaterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nesterov" | "nesterovs" => Ok(UpdaterKind::Nesterov),
            "adadelta" => Ok(UpdaterKind::Adadelta),
            "rmsprop" => Ok(UpdaterKind::RmsProp),
            "adam" => Ok(UpdaterKind::Adam),
            other => Err(Error::Config(format!("unknown updater {other:?}"))),
        }
    }
}

/// Classifier hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Hidden layer widths. `None` means `[min(256, d_in), 64, 16]`.
    pub hidden_layers: Option<Vec<usize>>,
    pub hidden_activation: Activation,
    pub learning_rate: f64,
    pub bias_learning_rate: f64,
    /// Nesterov momentum; the other updaters ignore it.
    pub momentum: f64,
    pub updater: UpdaterKind,
    pub grad_norm_threshold: f64,
    pub adadelta_rho: f64,
    pub adadelta_epsilon: f64,
    pub rmsprop_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub bias_init: f64,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden_layers: None,
            hidden_activation: Activation::Relu,
            learning_rate: 0.1,
            bias_learning_rate: 0.01,
            momentum: 0.9,
            updater: UpdaterKind::Nesterov,
            grad_norm_threshold: 1.0,
            adadelta_rho: 0.0,
            adadelta_epsilon: 1e-6,
            rmsprop_decay: 0.95,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            epochs: 10,
            batch_size: 100,
            bias_init: 1.0,
            seed: 1,
        }
    }
}

impl NetworkConfig {
    pub fn hidden_for(&self, d_in: usize) -> Vec<usize> {
        self.hidden_layers
            .clone()
            .unwrap_or_else(|| vec![d_in.clamp(1, 256), 64, 16])
    }

    /// `[d_in, hidden.., n_classes]`.
    pub fn layer_sizes(&self, d_in: usize, n_classes: usize) -> Vec<usize> {
        let mut sizes = vec![d_in];
        sizes.extend(self.hidden_for(d_in));
        sizes.push(n_classes);
        sizes
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("net: {m}")));
        if let Some(h) = &self.hidden_layers {
            if h.is_empty() || h.contains(&0) {
                return bad(format!("hidden layer widths must be positive and non-empty, got {h:?}"));
            }
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("bias_learning_rate", self.bias_learning_rate),
            ("adadelta_epsilon", self.adadelta_epsilon),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        for (name, v) in [
            ("momentum", self.momentum),
            ("adadelta_rho", self.adadelta_rho),
            ("rmsprop_decay", self.rmsprop_decay),
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1), got {v}"));
            }
        }
        if self.grad_norm_threshold.is_nan() || self.grad_norm_threshold <= 0.0 {
            return bad(format!(
                "grad_norm_threshold must be > 0, got {}",
                self.grad_norm_threshold
            ));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !self.bias_init.is_finite() {
            return bad("bias_init must be finite".into());
        }
        Ok(())
    }
}
