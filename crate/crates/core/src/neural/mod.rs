//! Feedforward softmax classifier trained by mini-batch gradient descent.

mod config;
pub mod io;
mod matrix;
mod network;
mod train;
mod updater;

pub use config::{Activation, NetworkConfig, UpdaterKind};
pub use matrix::Matrix;
pub use network::{
    backward, clip_by_norm, mcxent_loss, softmax, xavier_init, Dense, Forward, Gradients, LayerGrad, Network, LOG_FLOOR,
};
pub use train::{argmax, evaluate, fit, predict, train, Evaluation};
pub use updater::{updater_step, LayerSlots, Slots, UpdaterState, UPDATER_EPSILON};
