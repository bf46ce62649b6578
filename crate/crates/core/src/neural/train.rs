use super::config::{NetworkConfig, UpdaterKind};
use super::matrix::Matrix;
use super::network::{backward, clip_by_norm, forward_layers, mcxent_loss, Network};
use super::updater::{apply_deltas, updater_step, velocities};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, keys};

fn check_shapes(net: &Network, ds: &Dataset) -> Result<()> {
    if ds.n_features() != net.n_inputs() {
        return Err(Error::Shape(format!(
            "dataset has {} features, network expects {}",
            ds.n_features(),
            net.n_inputs()
        )));
    }
    if ds.n_classes() > net.n_classes() {
        return Err(Error::Shape(format!(
            "dataset has {} classes, network outputs {}",
            ds.n_classes(),
            net.n_classes()
        )));
    }
    Ok(())
}

fn batch_matrix(ds: &Dataset, idx: &[usize]) -> (Matrix, Vec<usize>) {
    let d = ds.n_features();
    let mut data = Vec::with_capacity(idx.len() * d);
    for &i in idx {
        data.extend_from_slice(ds.row(i));
    }
    let labels = idx.iter().map(|&i| ds.labels()[i]).collect();
    (Matrix::from_vec(idx.len(), d, data), labels)
}

/// Mini-batch training in place; returns the mean loss of each epoch.
///
/// Epoch `e` shuffles with substream `(seed, SHUFFLE, e)`. With the nesterov
/// updater the gradient is taken at the lookahead point `θ + μ·v`.
pub fn train(net: &mut Network, ds: &Dataset) -> Result<Vec<f64>> {
    check_shapes(net, ds)?;
    let cfg = net.config.clone();
    cfg.validate()?;
    let n = ds.n_samples();
    if n == 0 {
        return Err(Error::Data("cannot train on an empty dataset".into()));
    }
    let batch = cfg.batch_size.min(n);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..cfg.epochs {
        let mut rng = rng::substream(cfg.seed, keys::SHUFFLE, epoch as u64);
        rng::shuffle(&mut order, &mut rng);
        let mut total = 0.0;
        for (b, idx) in order.chunks(batch).enumerate() {
            let (x, y) = batch_matrix(ds, idx);
            let loss = train_batch(net, &cfg, &x, &y).map_err(|e| annotate(e, epoch, b))?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite loss at epoch {epoch}, batch {b}")));
            }
            total += loss * idx.len() as f64;
        }
        history.push(total / n as f64);
    }
    Ok(history)
}

fn annotate(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("{m} at epoch {epoch}, batch {batch}")),
        other => other,
    }
}

fn train_batch(net: &mut Network, cfg: &NetworkConfig, x: &Matrix, y: &[usize]) -> Result<f64> {
    let lookahead = if cfg.updater == UpdaterKind::Nesterov && cfg.momentum > 0.0 {
        let mut shifted = net.layers.clone();
        apply_deltas(&mut shifted, &velocities(&net.state, &net.layers), cfg.momentum);
        Some(shifted)
    } else {
        None
    };
    let layers = lookahead.as_deref().unwrap_or(&net.layers);
    let fwd = forward_layers(layers, cfg.hidden_activation, x)?;
    let loss = mcxent_loss(&fwd.probs, y)?;
    let mut grads = backward(layers, cfg.hidden_activation, &fwd, y)?;
    clip_by_norm(&mut grads, cfg.grad_norm_threshold);
    let delta = updater_step(&mut net.state, &grads, cfg)?;
    apply_deltas(&mut net.layers, &delta, 1.0);
    if !net.parameters_finite() {
        return Err(Error::Numeric("parameters became non-finite".into()));
    }
    Ok(loss)
}

/// Builds a fresh network sized for `ds` and trains it.
pub fn fit(ds: &Dataset, cfg: &NetworkConfig) -> Result<(Network, Vec<f64>)> {
    let sizes = cfg.layer_sizes(ds.n_features(), ds.n_classes());
    let mut net = Network::new(&sizes, cfg.clone())?;
    let history = train(&mut net, ds)?;
    Ok((net, history))
}

/// Accuracy and confusion matrix (`confusion[true][predicted]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
}

/// Index of the largest entry; ties go to the lower index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict(net: &Network, x: &Matrix) -> Result<Vec<usize>> {
    let fwd = net.forward(x)?;
    Ok((0..fwd.probs.rows()).map(|r| argmax(fwd.probs.row(r))).collect())
}

pub fn evaluate(net: &Network, ds: &Dataset) -> Result<Evaluation> {
    check_shapes(net, ds)?;
    let c = net.n_classes();
    let idx: Vec<usize> = (0..ds.n_samples()).collect();
    let mut confusion = vec![vec![0usize; c]; c];
    if idx.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    let (x, y) = batch_matrix(ds, &idx);
    for (pred, &truth) in predict(net, &x)?.into_iter().zip(&y) {
        confusion[truth][pred] += 1;
    }
    let correct: usize = (0..c).map(|i| confusion[i][i]).sum();
    Ok(Evaluation {
        accuracy: correct as f64 / idx.len() as f64,
        confusion,
    })
}
