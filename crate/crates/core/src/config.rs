//! Flat `section.key = value` configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are rejected.
//! Keys whose value is fixed by the implementation (the logistic chaotic map,
//! bit-flip mutation, Xavier weights, cross-entropy loss and so on) are still
//! accepted so that a full parameter listing round-trips, but only with their
//! single supported value.

use std::fmt::Write as _;

use crate::data::{LabelColumn, LoadOptions, NanPolicy};
use crate::error::{Error, Result};
use crate::pipeline::{EvalProtocol, PipelineConfig};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_HOLDOUT: f64 = 0.7;

/// Everything the command line can configure.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub pipeline: PipelineConfig,
    pub load: LoadOptions,
    // Both protocol parameters are remembered so switching protocol keeps them.
    folds: usize,
    holdout_fraction: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            load: LoadOptions::default(),
            folds: DEFAULT_FOLDS,
            holdout_fraction: DEFAULT_HOLDOUT,
        }
    }
}

/// Keys that accept exactly one value.
const FIXED: &[(&str, &str)] = &[
    ("firefly.accelerator_type", "normal"),
    ("firefly.chaotic_parameter_type", "normal"),
    ("firefly.chaotic_population_type", "normal"),
    ("firefly.chaotic_map", "logistic"),
    ("firefly.mutation_type", "bit_flip"),
    ("elephant.accelerator_type", "normal"),
    ("elephant.chaotic_parameter_type", "normal"),
    ("elephant.chaotic_map", "logistic"),
    ("elephant.mutation_type", "bit_flip"),
    ("net.output_activation", "softmax"),
    ("net.weight_init", "xavier"),
    ("net.distribution", "normal"),
    ("net.loss", "mcxent"),
    ("net.optimization", "sgd"),
    ("net.decimal_places", "2"),
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key}: invalid value {value:?}: {e}")))
}

fn radius(key: &str, value: &str) -> Result<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

fn show_radius(r: Option<f64>) -> String {
    r.map_or_else(|| "auto".into(), |v| format!("{v:?}"))
}

/// Parses config text into `(line, key, value)` triples.
pub fn parse_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            row: i + 1,
            message: format!("expected `key = value`, got {line:?}"),
        })?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl Settings {
    /// Applies every line of a config file.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (line, key, value) in parse_lines(text)? {
            self.set(&key, &value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {line}: {m}")),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Sets every seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.pipeline.set_seed(seed);
    }

    /// Sets one key. Errors name the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        if let Some((_, fixed)) = FIXED.iter().find(|(k, _)| *k == key) {
            if value.eq_ignore_ascii_case(fixed) {
                return Ok(());
            }
            return Err(Error::Config(format!(
                "{key}: only {fixed:?} is supported, got {value:?}"
            )));
        }
        let named = |e: Error| match e {
            Error::Config(m) => Error::Config(format!("{key}: {m}")),
            other => other,
        };
        let p = &mut self.pipeline;
        match key {
            "search.algorithm" => p.algorithm = value.parse().map_err(named)?,
            "search.jobs" => p.jobs = num(key, value)?,

            "firefly.population" => p.firefly.population = num(key, value)?,
            "firefly.iterations" => p.firefly.iterations = num(key, value)?,
            "firefly.absorption" => p.firefly.gamma_absorption = num(key, value)?,
            "firefly.beta_min" => p.firefly.beta_min = num(key, value)?,
            "firefly.beta_zero" => p.firefly.beta_zero = num(key, value)?,
            "firefly.alpha" => p.firefly.alpha_step = num(key, value)?,
            "firefly.chaotic_coefficient" => p.firefly.chaotic_coefficient = num(key, value)?,
            "firefly.mutation_prob" => p.firefly.mutation_prob = num(key, value)?,
            "firefly.report_frequency" => p.firefly.report_frequency = num(key, value)?,
            "firefly.seed" => p.firefly.seed = num(key, value)?,

            "elephant.population" => p.elephant.population = num(key, value)?,
            "elephant.iterations" => p.elephant.iterations = num(key, value)?,
            "elephant.n_clans" => p.elephant.n_clans = num(key, value)?,
            "elephant.male_fraction" => p.elephant.male_fraction = num(key, value)?,
            "elephant.female_visual_radius" => p.elephant.female_visual_radius = radius(key, value)?,
            "elephant.male_visual_radius" => p.elephant.male_visual_radius = radius(key, value)?,
            "elephant.max_age" => p.elephant.max_age = num(key, value)?,
            "elephant.chaotic_coefficient" => p.elephant.chaotic_coefficient = num(key, value)?,
            "elephant.mutation_prob" => p.elephant.mutation_prob = num(key, value)?,
            "elephant.report_frequency" => p.elephant.report_frequency = num(key, value)?,
            "elephant.seed" => p.elephant.seed = num(key, value)?,

            "objective.kind" => p.objective.kind = value.parse().map_err(named)?,
            "objective.quality" => p.objective.quality = value.parse().map_err(named)?,
            "objective.w_quality" => p.objective.w_quality = num(key, value)?,
            "objective.w_parsimony" => p.objective.w_parsimony = num(key, value)?,
            "objective.folds" => p.objective.folds = num(key, value)?,
            "objective.seed" => p.objective.seed = num(key, value)?,

            "net.hidden_layers" => {
                p.net.hidden_layers = if value == "auto" {
                    None
                } else {
                    Some(value.split(',').map(|s| num(key, s.trim())).collect::<Result<_>>()?)
                }
            }
            "net.hidden_activation" => p.net.hidden_activation = value.parse().map_err(named)?,
            "net.learning_rate" => p.net.learning_rate = num(key, value)?,
            "net.bias_learning_rate" => p.net.bias_learning_rate = num(key, value)?,
            "net.momentum" => p.net.momentum = num(key, value)?,
            "net.updater" => p.net.updater = value.parse().map_err(named)?,
            "net.grad_norm_threshold" => p.net.grad_norm_threshold = num(key, value)?,
            "net.adadelta_rho" => p.net.adadelta_rho = num(key, value)?,
            "net.adadelta_epsilon" => p.net.adadelta_epsilon = num(key, value)?,
            "net.rmsprop_decay" => p.net.rmsprop_decay = num(key, value)?,
            "net.adam_beta1" => p.net.adam_beta1 = num(key, value)?,
            "net.adam_beta2" => p.net.adam_beta2 = num(key, value)?,
            "net.epochs" => p.net.epochs = num(key, value)?,
            "net.batch_size" => p.net.batch_size = num(key, value)?,
            "net.bias_init" => p.net.bias_init = num(key, value)?,
            "net.seed" => p.net.seed = num(key, value)?,

            "eval.protocol" => {
                p.eval = match value {
                    "kfold" => EvalProtocol::KFold(self.folds),
                    "holdout" => EvalProtocol::Holdout(self.holdout_fraction),
                    other => {
                        return Err(Error::Config(format!(
                            "{key}: expected kfold or holdout, got {other:?}"
                        )));
                    }
                }
            }
            "eval.folds" => {
                self.folds = num(key, value)?;
                if let EvalProtocol::KFold(_) = p.eval {
                    p.eval = EvalProtocol::KFold(self.folds);
                }
            }
            "eval.holdout_fraction" => {
                self.holdout_fraction = num(key, value)?;
                if let EvalProtocol::Holdout(_) = p.eval {
                    p.eval = EvalProtocol::Holdout(self.holdout_fraction);
                }
            }
            "eval.seed" => p.seed = num(key, value)?,

            "data.label_column" => {
                self.load.label_column = if value == "last" {
                    LabelColumn::Last
                } else {
                    LabelColumn::Index(num(key, value)?)
                }
            }
            "data.missing" => {
                self.load.nan_replacement = if value == "reject" {
                    NanPolicy::Reject
                } else {
                    NanPolicy::Replace(num(key, value)?)
                }
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a form `apply_text` accepts.
    pub fn to_text(&self) -> String {
        let p = &self.pipeline;
        let (ff, el, ob, net) = (&p.firefly, &p.elephant, &p.objective, &p.net);
        let mut entries: Vec<(&str, String)> = vec![
            ("search.algorithm", p.algorithm.to_string()),
            ("search.jobs", p.jobs.to_string()),
            ("firefly.population", ff.population.to_string()),
            ("firefly.iterations", ff.iterations.to_string()),
            ("firefly.absorption", format!("{:?}", ff.gamma_absorption)),
            ("firefly.beta_min", format!("{:?}", ff.beta_min)),
            ("firefly.beta_zero", format!("{:?}", ff.beta_zero)),
            ("firefly.alpha", format!("{:?}", ff.alpha_step)),
            ("firefly.chaotic_coefficient", format!("{:?}", ff.chaotic_coefficient)),
            ("firefly.mutation_prob", format!("{:?}", ff.mutation_prob)),
            ("firefly.report_frequency", ff.report_frequency.to_string()),
            ("firefly.seed", ff.seed.to_string()),
            ("elephant.population", el.population.to_string()),
            ("elephant.iterations", el.iterations.to_string()),
            ("elephant.n_clans", el.n_clans.to_string()),
            ("elephant.male_fraction", format!("{:?}", el.male_fraction)),
            ("elephant.female_visual_radius", show_radius(el.female_visual_radius)),
            ("elephant.male_visual_radius", show_radius(el.male_visual_radius)),
            ("elephant.max_age", el.max_age.to_string()),
            ("elephant.chaotic_coefficient", format!("{:?}", el.chaotic_coefficient)),
            ("elephant.mutation_prob", format!("{:?}", el.mutation_prob)),
            ("elephant.report_frequency", el.report_frequency.to_string()),
            ("elephant.seed", el.seed.to_string()),
            ("objective.kind", ob.kind.to_string()),
            ("objective.quality", ob.quality.to_string()),
            ("objective.w_quality", format!("{:?}", ob.w_quality)),
            ("objective.w_parsimony", format!("{:?}", ob.w_parsimony)),
            ("objective.folds", ob.folds.to_string()),
            ("objective.seed", ob.seed.to_string()),
            (
                "net.hidden_layers",
                net.hidden_layers.as_ref().map_or_else(
                    || "auto".to_string(),
                    |h| h.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
                ),
            ),
            ("net.hidden_activation", net.hidden_activation.to_string()),
            ("net.learning_rate", format!("{:?}", net.learning_rate)),
            ("net.bias_learning_rate", format!("{:?}", net.bias_learning_rate)),
            ("net.momentum", format!("{:?}", net.momentum)),
            ("net.updater", net.updater.to_string()),
            ("net.grad_norm_threshold", format!("{:?}", net.grad_norm_threshold)),
            ("net.adadelta_rho", format!("{:?}", net.adadelta_rho)),
            ("net.adadelta_epsilon", format!("{:?}", net.adadelta_epsilon)),
            ("net.rmsprop_decay", format!("{:?}", net.rmsprop_decay)),
            ("net.adam_beta1", format!("{:?}", net.adam_beta1)),
            ("net.adam_beta2", format!("{:?}", net.adam_beta2)),
            ("net.epochs", net.epochs.to_string()),
            ("net.batch_size", net.batch_size.to_string()),
            ("net.bias_init", format!("{:?}", net.bias_init)),
            ("net.seed", net.seed.to_string()),
            (
                "eval.protocol",
                match p.eval {
                    EvalProtocol::KFold(_) => "kfold".into(),
                    EvalProtocol::Holdout(_) => "holdout".into(),
                },
            ),
            ("eval.folds", self.folds.to_string()),
            ("eval.holdout_fraction", format!("{:?}", self.holdout_fraction)),
            ("eval.seed", p.seed.to_string()),
            (
                "data.label_column",
                match self.load.label_column {
                    LabelColumn::Last => "last".into(),
                    LabelColumn::Index(i) => i.to_string(),
                },
            ),
            (
                "data.missing",
                match self.load.nan_replacement {
                    NanPolicy::Reject => "reject".into(),
                    NanPolicy::Replace(v) => format!("{v:?}"),
                },
            ),
        ];
        entries.extend(FIXED.iter().map(|(k, v)| (*k, v.to_string())));
        entries.sort_by_key(|(k, _)| section_rank(k));
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn section_rank(key: &str) -> usize {
    const ORDER: [&str; 7] = ["search", "firefly", "elephant", "objective", "net", "eval", "data"];
    let section = key.split('.').next().unwrap_or("");
    ORDER.iter().position(|s| *s == section).unwrap_or(ORDER.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metaheuristics::Algorithm;
    use crate::neural::UpdaterKind;

    #[test]
    fn echo_round_trips() {
        let mut s = Settings::default();
        s.apply_text("net.updater = adam\neval.protocol = holdout\nelephant.male_visual_radius = 2.5\n")
            .unwrap();
        let mut back = Settings::default();
        back.apply_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
        let mut d = Settings::default();
        d.apply_text(&Settings::default().to_text()).unwrap();
        assert_eq!(d, Settings::default());
    }

    #[test]
    fn defaults_echo_table_values() {
        let text = Settings::default().to_text();
        for line in [
            "firefly.absorption = 0.001",
            "firefly.beta_min = 0.33",
            "firefly.chaotic_coefficient = 4.0",
            "firefly.iterations = 20",
            "firefly.population = 20",
            "firefly.report_frequency = 20",
            "firefly.chaotic_map = logistic",
            "elephant.mutation_prob = 0.01",
            "elephant.seed = 1",
            "net.learning_rate = 0.1",
            "net.bias_learning_rate = 0.01",
            "net.momentum = 0.9",
            "net.updater = nesterov",
            "net.bias_init = 1.0",
            "net.adadelta_rho = 0.0",
            "net.adadelta_epsilon = 1e-6",
            "net.rmsprop_decay = 0.95",
            "net.adam_beta1 = 0.9",
            "net.adam_beta2 = 0.999",
            "net.epochs = 10",
            "net.batch_size = 100",
            "net.decimal_places = 2",
        ] {
            assert!(text.lines().any(|l| l == line), "missing {line:?} in\n{text}");
        }
    }

    #[test]
    fn comments_and_sections() {
        let mut s = Settings::default();
        s.apply_text("# header\n\nsearch.algorithm = elephant  # trailing\nnet.updater=rmsprop\neval.folds = 5\n")
            .unwrap();
        assert_eq!(s.pipeline.algorithm, Algorithm::Elephant);
        assert_eq!(s.pipeline.net.updater, UpdaterKind::RmsProp);
        assert_eq!(s.pipeline.eval, EvalProtocol::KFold(5));
    }

    #[test]
    fn unknown_key_is_named() {
        let mut s = Settings::default();
        match s.apply_text("firefly.gama = 0.1") {
            Err(Error::Config(m)) => assert!(m.contains("firefly.gama") && m.contains("line 1"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixed_keys_accept_only_their_value() {
        let mut s = Settings::default();
        s.set("net.loss", "MCXENT").unwrap();
        assert!(matches!(s.set("net.loss", "mse"), Err(Error::Config(_))));
    }

    #[test]
    fn bad_values_and_lines() {
        let mut s = Settings::default();
        assert!(matches!(s.set("net.epochs", "ten"), Err(Error::Config(m)) if m.contains("net.epochs")));
        assert!(matches!(
            parse_lines("no equals sign"),
            Err(Error::Parse { row: 1, .. })
        ));
    }
}
