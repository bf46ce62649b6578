//! Plain-text model files.
//!
//! ```text
//! genesift-net v1
//! layers 4 6 3
//! config key=value ...
//! W <fan_out> <fan_in>
//! <row-major values, one row per line>
//! b <fan_out>
//! <values>
//! ...
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting so a
//! load restores every parameter bit for bit. Updater state is not saved.

use std::fmt::Write as _;
use std::path::Path;

use super::config::NetworkConfig;
use super::matrix::Matrix;
use super::network::{Dense, Network};
use crate::error::{Error, Result};

const MAGIC: &str = "genesift-net v1";

fn config_line(c: &NetworkConfig) -> String {
    let hidden = c
        .hidden_layers
        .as_ref()
        .map(|h| h.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
        .unwrap_or_else(|| "auto".into());
    format!(
        "config hidden={hidden} activation={} learning_rate={:?} bias_learning_rate={:?} momentum={:?} \
         updater={} grad_norm_threshold={:?} adadelta_rho={:?} adadelta_epsilon={:?} rmsprop_decay={:?} \
         adam_beta1={:?} adam_beta2={:?} epochs={} batch_size={} bias_init={:?} seed={}",
        c.hidden_activation,
        c.learning_rate,
        c.bias_learning_rate,
        c.momentum,
        c.updater,
        c.grad_norm_threshold,
        c.adadelta_rho,
        c.adadelta_epsilon,
        c.rmsprop_decay,
        c.adam_beta1,
        c.adam_beta2,
        c.epochs,
        c.batch_size,
        c.bias_init,
        c.seed
    )
}

fn parse_config(line: &str) -> Result<NetworkConfig> {
    let bad = |m: String| Error::Parse { row: 3, message: m };
    let mut c = NetworkConfig::default();
    for token in line.split_whitespace().skip(1) {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {token:?}")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("{k}: {e}")));
        let int = |v: &str| v.parse::<u64>().map_err(|e| bad(format!("{k}: {e}")));
        match k {
            "hidden" if v == "auto" => c.hidden_layers = None,
            "hidden" => {
                c.hidden_layers = Some(
                    v.split(',')
                        .map(|s| int(s).map(|n| n as usize))
                        .collect::<Result<_>>()?,
                )
            }
            "activation" => c.hidden_activation = v.parse()?,
            "learning_rate" => c.learning_rate = num(v)?,
            "bias_learning_rate" => c.bias_learning_rate = num(v)?,
            "momentum" => c.momentum = num(v)?,
            "updater" => c.updater = v.parse()?,
            "grad_norm_threshold" => c.grad_norm_threshold = num(v)?,
            "adadelta_rho" => c.adadelta_rho = num(v)?,
            "adadelta_epsilon" => c.adadelta_epsilon = num(v)?,
            "rmsprop_decay" => c.rmsprop_decay = num(v)?,
            "adam_beta1" => c.adam_beta1 = num(v)?,
            "adam_beta2" => c.adam_beta2 = num(v)?,
            "epochs" => c.epochs = int(v)? as usize,
            "batch_size" => c.batch_size = int(v)? as usize,
            "bias_init" => c.bias_init = num(v)?,
            "seed" => c.seed = int(v)?,
            other => return Err(bad(format!("unknown config key {other:?}"))),
        }
    }
    Ok(c)
}

pub fn to_text(net: &Network) -> String {
    let mut out = String::new();
    let sizes: Vec<String> = net.layer_sizes().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "layers {}", sizes.join(" "));
    let _ = writeln!(out, "{}", config_line(&net.config));
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    for layer in &net.layers {
        let _ = writeln!(out, "W {} {}", layer.fan_out(), layer.fan_in());
        for r in 0..layer.fan_out() {
            let _ = writeln!(out, "{}", join(layer.weights.row(r)));
        }
        let _ = writeln!(out, "b {}", layer.fan_out());
        let _ = writeln!(out, "{}", join(&layer.biases));
    }
    out
}

pub fn from_text(text: &str) -> Result<Network> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            row: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    };
    let (row, magic) = next("header")?;
    if magic != MAGIC {
        return Err(Error::Parse {
            row,
            message: format!("expected {MAGIC:?}"),
        });
    }
    let (row, layers_line) = next("layer sizes")?;
    let sizes: Vec<usize> = layers_line
        .strip_prefix("layers ")
        .ok_or_else(|| Error::Parse {
            row,
            message: "expected 'layers'".into(),
        })?
        .split_whitespace()
        .map(|s| {
            s.parse().map_err(|e| Error::Parse {
                row,
                message: format!("{e}"),
            })
        })
        .collect::<Result<_>>()?;
    let (_, cfg_line) = next("config")?;
    let config = parse_config(cfg_line)?;
    let floats = |row: usize, line: &str, n: usize| -> Result<Vec<f64>> {
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| {
                s.parse().map_err(|e| Error::Parse {
                    row,
                    message: format!("{e}"),
                })
            })
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(Error::Parse {
                row,
                message: format!("expected {n} values, got {}", v.len()),
            });
        }
        Ok(v)
    };
    let mut layers = Vec::new();
    for w in sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let (row, head) = next("weight header")?;
        if head != format!("W {fan_out} {fan_in}") {
            return Err(Error::Parse {
                row,
                message: format!("expected 'W {fan_out} {fan_in}'"),
            });
        }
        let mut data = Vec::with_capacity(fan_in * fan_out);
        for _ in 0..fan_out {
            let (row, line) = next("weight row")?;
            data.extend(floats(row, line, fan_in)?);
        }
        let (row, head) = next("bias header")?;
        if head != format!("b {fan_out}") {
            return Err(Error::Parse {
                row,
                message: format!("expected 'b {fan_out}'"),
            });
        }
        let (row, line) = next("biases")?;
        layers.push(Dense {
            weights: Matrix::from_vec(fan_out, fan_in, data),
            biases: floats(row, line, fan_out)?,
        });
    }
    Network::from_layers(layers, config)
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}
