//! Select → train → evaluate, producing one report row per run.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::data::{
    apply_mask, load_csv, minmax_normalize, stratified_kfold, stratified_split, Dataset, FeatureMask, LoadOptions,
    ManifestEntry,
};
use crate::error::{Error, Result, Stage};
use crate::fitness::{Objective, ObjectiveSpec};
use crate::metaheuristics::{
    run_search_with, Agent, Algorithm, ElephantParams, FireflyParams, SearchParams, SearchResult,
};
use crate::neural::{self, NetworkConfig};
use crate::rng::{self, keys};

/// How the classifier is scored on the reduced dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalProtocol {
    /// Stratified k-fold cross-validation; the mean fold accuracy is reported.
    KFold(usize),
    /// One stratified split; the value is the training fraction.
    Holdout(f64),
}

impl Default for EvalProtocol {
    fn default() -> Self {
        EvalProtocol::KFold(10)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub algorithm: Algorithm,
    pub firefly: FireflyParams,
    pub elephant: ElephantParams,
    pub objective: ObjectiveSpec,
    pub eval: EvalProtocol,
    pub net: NetworkConfig,
    /// Seed for the evaluation folds or split.
    pub seed: u64,
    /// Worker threads for fitness evaluation.
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Firefly,
            firefly: FireflyParams::default(),
            elephant: ElephantParams::default(),
            objective: ObjectiveSpec::default(),
            eval: EvalProtocol::default(),
            net: NetworkConfig::default(),
            seed: 1,
            jobs: 1,
        }
    }
}

impl PipelineConfig {
    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    /// Sets every seed (search, objective, network, evaluation) at once.
    pub fn set_seed(&mut self, seed: u64) {
        self.firefly.seed = seed;
        self.elephant.seed = seed;
        self.objective.seed = seed;
        self.net.seed = seed;
        self.seed = seed;
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.set_seed(seed);
        self
    }

    pub fn search_params(&self) -> SearchParams {
        match self.algorithm {
            Algorithm::Firefly => SearchParams::Firefly(self.firefly.clone()),
            Algorithm::Elephant => SearchParams::Elephant(self.elephant.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.firefly.validate()?;
        self.objective.validate()?;
        self.net.validate()?;
        match self.eval {
            EvalProtocol::KFold(k) if k < 2 => {
                return Err(Error::Config(format!("eval.folds must be >= 2, got {k}")));
            }
            EvalProtocol::Holdout(f) if !(f > 0.0 && f < 1.0) => {
                return Err(Error::Config(format!(
                    "eval.holdout_fraction must be in (0, 1), got {f}"
                )));
            }
            _ => {}
        }
        if self.jobs == 0 {
            return Err(Error::Config("search.jobs must be >= 1".into()));
        }
        Ok(())
    }
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub original_attributes: usize,
    pub instances: usize,
    pub n_classes: usize,
    pub reduced_attributes: usize,
    pub selection_time_s: f64,
    /// Unrounded; rounding happens only when formatted.
    pub accuracy_pct: f64,
}

/// Method label used in reports, e.g. `firefly+dl`.
pub fn method_label(algorithm: Algorithm) -> String {
    format!("{algorithm}+dl")
}

/// A report plus the search details behind it.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: EvalReport,
    pub search: SearchResult,
}

#[cfg(not(target_arch = "wasm32"))]
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

// No monotonic clock on bare wasm32.
#[cfg(target_arch = "wasm32")]
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    (f(), f64::NAN)
}

fn select(ds: &Arc<Dataset>, cfg: &PipelineConfig) -> Result<(SearchResult, f64)> {
    let inner = || -> Result<SearchResult> {
        let objective = Objective::new(cfg.objective.clone(), Arc::clone(ds), Some(cfg.net.clone()))?;
        run_search_with(
            &cfg.search_params(),
            &objective,
            ds.n_features(),
            cfg.jobs,
            |_, _: &[Agent]| {},
        )
    };
    let (result, secs) = timed(inner);
    Ok((result.map_err(|e| e.at_stage(Stage::Select))?, secs))
}

fn train_and_score(train: &Dataset, test: &Dataset, net: &NetworkConfig) -> Result<f64> {
    let (model, _) = neural::fit(train, net).map_err(|e| e.at_stage(Stage::Train))?;
    Ok(neural::evaluate(&model, test)
        .map_err(|e| e.at_stage(Stage::Eval))?
        .accuracy)
}

/// Accuracy (0..1) of the classifier on `ds` under `protocol`.
pub fn evaluate_protocol(ds: &Dataset, protocol: EvalProtocol, net: &NetworkConfig, seed: u64) -> Result<f64> {
    match protocol {
        EvalProtocol::KFold(k) => {
            let folds = stratified_kfold(ds.labels(), ds.n_classes(), k, seed).map_err(|e| e.at_stage(Stage::Eval))?;
            let n = ds.n_samples();
            let mut total = 0.0;
            for (f, test_idx) in folds.iter().enumerate() {
                let mut in_test = vec![false; n];
                test_idx.iter().for_each(|&i| in_test[i] = true);
                let train_idx: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
                let fold_net = NetworkConfig {
                    seed: net.seed.wrapping_add(f as u64),
                    ..net.clone()
                };
                total += train_and_score(&ds.subset(&train_idx), &ds.subset(test_idx), &fold_net)?;
            }
            Ok(total / folds.len() as f64)
        }
        EvalProtocol::Holdout(frac) => {
            let split = stratified_split(ds, frac, seed).map_err(|e| e.at_stage(Stage::Eval))?;
            train_and_score(&split.train, &split.test, net)
        }
    }
}

/// Normalizes `ds`, selects features on it, then evaluates the classifier on
/// the reduced data. Only the search is timed.
pub fn run_pipeline_full(ds: &Dataset, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let normalized = Arc::new(minmax_normalize(ds));
    let (search, secs) = select(&normalized, cfg)?;
    let reduced = apply_mask(&normalized, &search.best_mask).map_err(|e| e.at_stage(Stage::Select))?;
    let accuracy = evaluate_protocol(&reduced, cfg.eval, &cfg.net, cfg.seed)?;
    Ok(PipelineRun {
        report: report_for(ds, cfg.algorithm, &search.best_mask, secs, accuracy),
        search,
    })
}

pub fn run_pipeline(ds: &Dataset, cfg: &PipelineConfig) -> Result<EvalReport> {
    run_pipeline_full(ds, cfg).map(|r| r.report)
}

/// Fixed train/test split: normalization and selection see both parts, the
/// classifier trains on `train` only and is scored on `test`.
pub fn run_pipeline_split(train: &Dataset, test: &Dataset, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let all = train.concat(test).map_err(|e| e.at_stage(Stage::Load))?;
    let normalized = Arc::new(minmax_normalize(&all));
    let (search, secs) = select(&normalized, cfg)?;
    let reduced = apply_mask(&normalized, &search.best_mask).map_err(|e| e.at_stage(Stage::Select))?;
    let n_train = train.n_samples();
    let train_idx: Vec<usize> = (0..n_train).collect();
    let test_idx: Vec<usize> = (n_train..all.n_samples()).collect();
    let accuracy = train_and_score(&reduced.subset(&train_idx), &reduced.subset(&test_idx), &cfg.net)?;
    let report = report_for(
        &all.with_name(train.name()),
        cfg.algorithm,
        &search.best_mask,
        secs,
        accuracy,
    );
    Ok(PipelineRun { report, search })
}

fn report_for(ds: &Dataset, algorithm: Algorithm, mask: &FeatureMask, secs: f64, accuracy: f64) -> EvalReport {
    EvalReport {
        dataset: ds.name().to_string(),
        algorithm,
        original_attributes: ds.n_features(),
        instances: ds.n_samples(),
        n_classes: ds.n_classes(),
        reduced_attributes: mask.popcount(),
        selection_time_s: secs,
        accuracy_pct: accuracy * 100.0,
    }
}

/// Synthetic classification data with a known set of informative features.
///
/// Labels are balanced (`i % c`) and then shuffled. The `r`-th informative
/// feature has mean `2·((y + r) mod c)` plus Gaussian noise of std `noise`;
/// every other feature is standard normal.
pub fn gen_synthetic(
    n: usize,
    d: usize,
    k_informative: usize,
    c: usize,
    noise: f64,
    seed: u64,
) -> Result<(Dataset, FeatureMask)> {
    if c < 2 {
        return Err(Error::Config(format!("need at least 2 classes, got {c}")));
    }
    if d == 0 || k_informative > d {
        return Err(Error::Config(format!(
            "need 1 <= d and k <= d, got d={d}, k={k_informative}"
        )));
    }
    if n < c {
        return Err(Error::Config(format!(
            "need at least one sample per class, got n={n}, c={c}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::Config(format!("noise must be finite and >= 0, got {noise}")));
    }
    let mut r = rng::substream(seed, keys::SYNTHETIC, 0);
    let mut labels: Vec<usize> = (0..n).map(|i| i % c).collect();
    rng::shuffle(&mut labels, &mut r);
    let mut columns: Vec<usize> = (0..d).collect();
    rng::shuffle(&mut columns, &mut r);
    let mut informative: Vec<usize> = columns[..k_informative].to_vec();
    informative.sort_unstable();
    let mut rank = vec![None; d];
    for (pos, &j) in informative.iter().enumerate() {
        rank[j] = Some(pos);
    }
    let mut x = Vec::with_capacity(n * d);
    for &y in &labels {
        for rj in &rank {
            let z = rng::standard_normal(&mut r);
            x.push(match rj {
                Some(pos) => 2.0 * ((y + pos) % c) as f64 + noise * z,
                None => z,
            });
        }
    }
    let ds = Dataset::new(
        format!("synthetic-n{n}-d{d}-k{k_informative}-c{c}-s{seed}"),
        (0..d).map(|j| format!("f{j}")).collect(),
        (0..c).map(|k| format!("c{k}")).collect(),
        x,
        labels,
    )?;
    let mask = FeatureMask::from_indices(d, &informative)?;
    Ok((ds, mask))
}

/// Why a bench row failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub message: String,
    /// The input data was at fault (unreadable, malformed, unusable).
    pub data_error: bool,
}

impl From<&Error> for RowFailure {
    fn from(e: &Error) -> Self {
        Self {
            message: e.to_string(),
            data_error: e.is_data_error(),
        }
    }
}

/// One bench row: a report, or the reason the row failed.
#[derive(Debug)]
pub struct BenchRow {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub outcome: std::result::Result<EvalReport, RowFailure>,
}

impl BenchRow {
    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }
}

/// Runs every (config, dataset) pair. Rows are grouped by config and keep
/// manifest order inside each group. A failing dataset marks its row and the
/// rest still run. With `jobs > 1` rows run in parallel.
pub fn bench(entries: &[ManifestEntry], cfgs: &[PipelineConfig], load: &LoadOptions, jobs: usize) -> Vec<BenchRow> {
    let loaded: Vec<std::result::Result<Dataset, RowFailure>> = entries
        .iter()
        .map(|e| {
            load_csv(&e.path, load)
                .map(|ds| ds.with_name(e.name.clone()))
                .map_err(|err| RowFailure::from(&err.at_stage(Stage::Load)))
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..cfgs.len())
        .flat_map(|c| (0..entries.len()).map(move |e| (c, e)))
        .collect();
    let run = |&(c, e): &(usize, usize)| {
        let cfg = &cfgs[c];
        let outcome = match &loaded[e] {
            Ok(ds) => run_pipeline(ds, cfg).map_err(|err| RowFailure::from(&err)),
            Err(failure) => Err(failure.clone()),
        };
        BenchRow {
            dataset: entries[e].name.clone(),
            algorithm: cfg.algorithm,
            outcome,
        }
    };
    map_rows(&pairs, jobs, run)
}

#[cfg(feature = "parallel")]
fn map_rows<T: Sync, U: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_rows<T, U>(items: &[T], _jobs: usize, f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

pub const CSV_HEADER: &str =
    "dataset,algorithm,original_attributes,instances,classes,reduced_attributes,time_s,accuracy_pct";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV line for a report. `omit_time` leaves `time_s` empty so reruns can be
/// compared byte for byte.
pub fn csv_row(r: &EvalReport, omit_time: bool) -> String {
    let time = if omit_time {
        String::new()
    } else {
        format!("{:.2}", r.selection_time_s)
    };
    format!(
        "{},{},{},{},{},{},{},{:.2}",
        csv_field(&r.dataset),
        method_label(r.algorithm),
        r.original_attributes,
        r.instances,
        r.n_classes,
        r.reduced_attributes,
        time,
        r.accuracy_pct
    )
}

/// CSV line for a bench row; failed rows carry `NA` in every numeric field.
pub fn bench_csv_row(row: &BenchRow, omit_time: bool) -> String {
    match &row.outcome {
        Ok(r) => csv_row(r, omit_time),
        Err(_) => format!(
            "{},{},NA,NA,NA,NA,NA,NA",
            csv_field(&row.dataset),
            method_label(row.algorithm)
        ),
    }
}

pub fn bench_csv(rows: &[BenchRow], omit_time: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&bench_csv_row(row, omit_time));
        out.push('\n');
    }
    out
}

/// Long-form title for an algorithm's results table.
pub fn table_title(algorithm: Algorithm) -> &'static str {
    match algorithm {
        Algorithm::Firefly => "Firefly search based optimization with Deep learning classifier",
        Algorithm::Elephant => "Elephant search based optimization with Deep learning classifier",
    }
}

const TABLE_HEADER: [&str; 8] = [
    "Sl.No",
    "Dataset",
    "Original Attributes",
    "Instances",
    "Number of classes",
    "Reduced Attributes",
    "Time in seconds",
    "Accuracy in %",
];

fn table_cells(i: usize, row: &BenchRow) -> Vec<String> {
    let mut cells = vec![(i + 1).to_string(), row.dataset.clone()];
    match &row.outcome {
        Ok(r) => cells.extend([
            r.original_attributes.to_string(),
            r.instances.to_string(),
            r.n_classes.to_string(),
            r.reduced_attributes.to_string(),
            format!("{:.2}", r.selection_time_s),
            format!("{:.2}", r.accuracy_pct),
        ]),
        Err(f) => cells.extend(["FAILED".to_string(), f.message.clone()]),
    }
    cells
}

/// Aligned plain-text tables, one per algorithm in first-appearance order.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for r in rows {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
    }
    let mut out = String::new();
    for (t, alg) in algorithms.iter().enumerate() {
        if t > 0 {
            out.push('\n');
        }
        let group: Vec<&BenchRow> = rows.iter().filter(|r| r.algorithm == *alg).collect();
        let body: Vec<Vec<String>> = group.iter().enumerate().map(|(i, r)| table_cells(i, r)).collect();
        let mut widths: Vec<usize> = TABLE_HEADER.iter().map(|h| h.len()).collect();
        for cells in &body {
            // A failure message spans the remaining columns; keep it out of the widths.
            let sized = if cells.len() == TABLE_HEADER.len() {
                cells.len()
            } else {
                3
            };
            for (w, c) in widths.iter_mut().zip(cells.iter().take(sized)) {
                *w = (*w).max(c.len());
            }
        }
        let _ = writeln!(out, "{}", table_title(*alg));
        let line = |cells: &[String]| {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| match widths.get(i) {
                    Some(&w) if i + 1 < cells.len() => format!("{c:<w$}"),
                    _ => c.clone(),
                })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let header: Vec<String> = TABLE_HEADER.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{}", line(&header));
        for cells in &body {
            let _ = writeln!(out, "{}", line(cells));
        }
    }
    out
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = BenchRow {
            dataset: self.dataset.clone(),
            algorithm: self.algorithm,
            outcome: Ok(self.clone()),
        };
        f.write_str(format_table(std::slice::from_ref(&row)).trim_end())
    }
}

/// Recall of `found` against `truth`: |found ∩ truth| / |truth|.
pub fn recall(found: &FeatureMask, truth: &FeatureMask) -> f64 {
    let k = truth.popcount();
    if k == 0 {
        return 0.0;
    }
    found.overlap(truth) as f64 / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_shape_and_truth() {
        let (ds, truth) = gen_synthetic(200, 100, 5, 2, 0.5, 1).unwrap();
        assert_eq!((ds.n_samples(), ds.n_features(), ds.n_classes()), (200, 100, 2));
        assert_eq!(truth.popcount(), 5);
        assert_eq!(ds.class_counts(), vec![100, 100]);
        let (again, t2) = gen_synthetic(200, 100, 5, 2, 0.5, 1).unwrap();
        assert_eq!(ds, again);
        assert_eq!(truth, t2);
        let (other, _) = gen_synthetic(200, 100, 5, 2, 0.5, 2).unwrap();
        assert_ne!(ds, other);
    }

    #[test]
    fn zero_noise_feature_separates_classes() {
        let (ds, truth) = gen_synthetic(50, 10, 1, 2, 0.0, 3).unwrap();
        let j = truth.indices()[0];
        let threshold = 1.0;
        for i in 0..ds.n_samples() {
            let predicted = usize::from(ds.value(i, j) > threshold);
            assert_eq!(predicted, ds.labels()[i]);
        }
    }

    #[test]
    fn synthetic_rejects_bad_shapes() {
        assert!(gen_synthetic(10, 5, 6, 2, 0.5, 1).is_err());
        assert!(gen_synthetic(10, 5, 2, 1, 0.5, 1).is_err());
    }

    #[test]
    fn csv_formatting() {
        let r = EvalReport {
            dataset: "a,b".into(),
            algorithm: Algorithm::Elephant,
            original_attributes: 100,
            instances: 200,
            n_classes: 2,
            reduced_attributes: 7,
            selection_time_s: 0.123,
            accuracy_pct: 87.256,
        };
        assert_eq!(csv_row(&r, false), "\"a,b\",elephant+dl,100,200,2,7,0.12,87.26");
        assert_eq!(csv_row(&r, true), "\"a,b\",elephant+dl,100,200,2,7,,87.26");
        let failed = BenchRow {
            dataset: "x".into(),
            algorithm: Algorithm::Firefly,
            outcome: Err(RowFailure {
                message: "load stage failed".into(),
                data_error: true,
            }),
        };
        assert_eq!(bench_csv_row(&failed, false), "x,firefly+dl,NA,NA,NA,NA,NA,NA");
    }

    #[test]
    fn empty_bench() {
        let rows = bench(&[], &[PipelineConfig::default()], &LoadOptions::default(), 1);
        assert!(rows.is_empty());
        assert_eq!(bench_csv(&rows, true), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn recall_counts_overlap() {
        let truth = FeatureMask::from_indices(10, &[1, 2, 3, 4]).unwrap();
        let found = FeatureMask::from_indices(10, &[2, 4, 9]).unwrap();
        assert_eq!(recall(&found, &truth), 0.5);
    }
}
