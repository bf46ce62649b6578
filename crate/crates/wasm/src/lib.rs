//! Browser demo bindings. Every export returns a JSON string that the page
//! in `www/` draws on a canvas.

use std::sync::Arc;

use genesift::data::{minmax_normalize, Dataset, FeatureMask};
use genesift::fitness::Objective;
use genesift::metaheuristics::{attractiveness, chaotic_init, run_search_with, Agent, Algorithm, FireflyParams};
use genesift::neural::{evaluate, fit, NetworkConfig, UpdaterKind};
use genesift::pipeline::{gen_synthetic, recall, PipelineConfig};
use genesift::rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct SearchFrame {
    pub iteration: usize,
    pub best_fitness: f64,
    pub best_popcount: usize,
    pub mean_popcount: f64,
    pub best_recall: f64,
}

#[derive(Debug, Serialize)]
pub struct SearchDemo {
    pub algorithm: String,
    pub n_features: usize,
    pub truth: Vec<usize>,
    pub selected: Vec<usize>,
    pub recall: f64,
    pub evaluations: usize,
    pub frames: Vec<SearchFrame>,
}

/// Runs a search on synthetic data and records one frame per iteration.
pub fn search_demo(algorithm: &str, n: usize, d: usize, k: usize, noise: f64, seed: u64) -> Result<SearchDemo, String> {
    let algorithm: Algorithm = algorithm.parse().map_err(|e: genesift::Error| e.to_string())?;
    let (ds, truth) = gen_synthetic(n, d, k, 2, noise, seed).map_err(|e| e.to_string())?;
    let ds = Arc::new(minmax_normalize(&ds));
    let objective = Objective::merit(Arc::clone(&ds));
    let cfg = PipelineConfig::default().with_algorithm(algorithm).with_seed(seed);

    let mut frames = Vec::new();
    let mut best: Option<(f64, FeatureMask)> = None;
    let result = run_search_with(&cfg.search_params(), &objective, d, 1, |t, pop: &[Agent]| {
        for agent in pop {
            if let Some(f) = agent.fitness {
                if best.as_ref().is_none_or(|(b, _)| f > *b) {
                    best = Some((f, agent.mask()));
                }
            }
        }
        let (fitness, mask) = best.clone().expect("population is evaluated before observation");
        let mean = pop.iter().map(|a| a.mask().popcount() as f64).sum::<f64>() / pop.len() as f64;
        frames.push(SearchFrame {
            iteration: t,
            best_fitness: fitness,
            best_popcount: mask.popcount(),
            mean_popcount: mean,
            best_recall: recall(&mask, &truth),
        });
    })
    .map_err(|e| e.to_string())?;
    Ok(SearchDemo {
        algorithm: algorithm.to_string(),
        n_features: d,
        truth: truth.indices(),
        selected: result.best_mask.indices(),
        recall: recall(&result.best_mask, &truth),
        evaluations: result.evaluations,
        frames,
    })
}

#[derive(Debug, Serialize)]
pub struct LossCurve {
    pub updater: String,
    pub losses: Vec<f64>,
    pub accuracy: f64,
}

/// Two Gaussian blobs in the unit square.
pub fn blobs(n: usize, spread: f64, seed: u64) -> Result<Dataset, String> {
    let mut r = rng::substream(seed, 0, 0);
    let mut x = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let centre = if c == 0 { 0.3 } else { 0.7 };
        for _ in 0..2 {
            x.push((centre + spread * rng::standard_normal(&mut r)).clamp(0.0, 1.0));
        }
        y.push(c);
    }
    Dataset::new(
        "blobs",
        vec!["x".into(), "y".into()],
        vec!["a".into(), "b".into()],
        x,
        y,
    )
    .map_err(|e| e.to_string())
}

/// Trains one network per updater on the same blobs and returns the curves.
pub fn train_demo(epochs: usize, spread: f64, seed: u64) -> Result<Vec<LossCurve>, String> {
    let ds = blobs(200, spread, seed)?;
    [
        UpdaterKind::Nesterov,
        UpdaterKind::Adadelta,
        UpdaterKind::RmsProp,
        UpdaterKind::Adam,
    ]
    .into_iter()
    .map(|updater| {
        let cfg = NetworkConfig {
            updater,
            epochs,
            seed,
            ..NetworkConfig::default()
        };
        let (net, losses) = fit(&ds, &cfg).map_err(|e| e.to_string())?;
        let accuracy = evaluate(&net, &ds).map_err(|e| e.to_string())?.accuracy;
        Ok(LossCurve {
            updater: updater.to_string(),
            losses,
            accuracy,
        })
    })
    .collect()
}

#[derive(Debug, Serialize)]
pub struct ChaosDemo {
    pub histogram: Vec<usize>,
    pub attractiveness: Vec<(f64, f64)>,
}

/// Histogram of chaotic initial coordinates and the firefly attraction curve.
pub fn chaos_demo(coefficient: f64, gamma: f64, beta_min: f64, bins: usize, seed: u64) -> Result<ChaosDemo, String> {
    if bins == 0 {
        return Err("bins must be positive".into());
    }
    let mut histogram = vec![0usize; bins];
    for agent in chaotic_init(50, 200, coefficient, seed) {
        for v in agent.position {
            let b = ((v * bins as f64) as usize).min(bins - 1);
            histogram[b] += 1;
        }
    }
    let params = FireflyParams {
        gamma_absorption: gamma,
        beta_min,
        ..FireflyParams::default()
    };
    let attractiveness = (0..=100)
        .map(|i| {
            let r = i as f64 * 0.5;
            (r, attractiveness(r, &params))
        })
        .collect();
    Ok(ChaosDemo {
        histogram,
        attractiveness,
    })
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsValue> {
    let v = value.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = runSearch)]
pub fn run_search_js(algorithm: &str, n: usize, d: usize, k: usize, noise: f64, seed: u32) -> Result<String, JsValue> {
    to_js(search_demo(algorithm, n, d, k, noise, u64::from(seed)))
}

#[wasm_bindgen(js_name = trainUpdaters)]
pub fn train_updaters_js(epochs: usize, spread: f64, seed: u32) -> Result<String, JsValue> {
    to_js(train_demo(epochs, spread, u64::from(seed)))
}

#[wasm_bindgen(js_name = chaosAndAttraction)]
pub fn chaos_js(coefficient: f64, gamma: f64, beta_min: f64, bins: usize, seed: u32) -> Result<String, JsValue> {
    to_js(chaos_demo(coefficient, gamma, beta_min, bins, u64::from(seed)))
}
