//! Objectives that score a feature mask against a dataset.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::data::{apply_mask, stratified_kfold, Dataset, FeatureMask};
use crate::error::{Error, Result};
use crate::metaheuristics::MaskObjective;
use crate::neural::{self, NetworkConfig};

/// Sample Pearson correlation. Zero when either vector is constant.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!(
            "pearson: lengths {} and {} differ",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::Shape("pearson: need at least 2 observations".into()));
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Ok(0.0);
    }
    Ok((suv / (suu.sqrt() * svv.sqrt())).clamp(-1.0, 1.0))
}

/// Centered, unit-norm copy of `v`, or zeros when `v` is constant.
fn standardize(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let mut out: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    } else {
        out.iter_mut().for_each(|x| *x = 0.0);
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-dataset precomputation for correlation-based merit.
///
/// Feature–feature correlations become dot products of standardized columns,
/// and every feature's class correlation is computed once up front.
#[derive(Debug, Clone)]
pub struct MeritTable {
    columns: Vec<Vec<f64>>,
    class_corr: Vec<f64>,
}

impl MeritTable {
    pub fn new(ds: &Dataset) -> Self {
        let n = ds.n_samples();
        let c = ds.n_classes();
        let targets: Vec<Vec<f64>> = if c == 2 {
            vec![ds.labels().iter().map(|&y| y as f64).collect()]
        } else {
            (0..c)
                .map(|k| ds.labels().iter().map(|&y| f64::from(u8::from(y == k))).collect())
                .collect()
        };
        let targets: Vec<Vec<f64>> = targets.iter().map(|t| standardize(t)).collect();
        let columns: Vec<Vec<f64>> = (0..ds.n_features()).map(|j| standardize(&ds.column(j))).collect();
        let class_corr = columns
            .iter()
            .map(|col| {
                if n < 2 {
                    return 0.0;
                }
                targets.iter().map(|t| dot(col, t).abs().min(1.0)).sum::<f64>() / targets.len() as f64
            })
            .collect();
        Self { columns, class_corr }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    /// Absolute class correlation of each feature (mean over one-vs-rest
    /// indicators when there are more than two classes).
    pub fn class_correlations(&self) -> &[f64] {
        &self.class_corr
    }

    /// `k * mean|r_cf| / sqrt(k + k(k-1) * mean|r_ff|)`.
    pub fn merit(&self, mask: &FeatureMask) -> Result<f64> {
        mask.check_for(self.n_features())?;
        let selected = mask.indices();
        let k = selected.len() as f64;
        let r_cf = selected.iter().map(|&j| self.class_corr[j]).sum::<f64>() / k;
        let mut r_ff = 0.0;
        if selected.len() > 1 {
            let mut total = 0.0;
            for (a, &i) in selected.iter().enumerate() {
                for &j in &selected[a + 1..] {
                    total += dot(&self.columns[i], &self.columns[j]).abs().min(1.0);
                }
            }
            r_ff = total / (k * (k - 1.0) / 2.0);
        }
        Ok(k * r_cf / (k + k * (k - 1.0) * r_ff).sqrt())
    }
}

/// Correlation-based feature-subset merit of `mask` on `ds`.
pub fn cfs_merit(ds: &Dataset, mask: &FeatureMask) -> Result<f64> {
    mask.check_for(ds.n_features())?;
    MeritTable::new(&apply_mask(ds, mask)?).merit(&FeatureMask::ones(mask.popcount()))
}

/// Mean stratified k-fold accuracy of a network trained on the masked data.
///
/// Fold `f` trains with seed `cfg.seed + f`.
pub fn wrapper_accuracy(ds: &Dataset, mask: &FeatureMask, cfg: &NetworkConfig, folds: usize, seed: u64) -> Result<f64> {
    let masked = apply_mask(ds, mask)?;
    let assignment = stratified_kfold(masked.labels(), masked.n_classes(), folds, seed)?;
    kfold_accuracy(&masked, &assignment, cfg)
}

/// Trains and scores one network per fold; returns the mean fold accuracy.
pub(crate) fn kfold_accuracy(ds: &Dataset, folds: &[Vec<usize>], cfg: &NetworkConfig) -> Result<f64> {
    let n = ds.n_samples();
    let mut total = 0.0;
    for (f, test_idx) in folds.iter().enumerate() {
        let mut in_test = vec![false; n];
        test_idx.iter().for_each(|&i| in_test[i] = true);
        let train_idx: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        if train_idx.is_empty() || test_idx.is_empty() {
            return Err(Error::Evaluation(format!("fold {f} has an empty partition")));
        }
        let fold_cfg = NetworkConfig {
            seed: cfg.seed.wrapping_add(f as u64),
            ..cfg.clone()
        };
        let (net, _) = neural::fit(&ds.subset(&train_idx), &fold_cfg)?;
        total += neural::evaluate(&net, &ds.subset(test_idx))?.accuracy;
    }
    Ok(total / folds.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveKind {
    #[default]
    Merit,
    Wrapper,
    MultiObjective,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::Merit => "merit",
            ObjectiveKind::Wrapper => "wrapper",
            ObjectiveKind::MultiObjective => "multi_objective",
        })
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "merit" | "merits" => Ok(ObjectiveKind::Merit),
            "wrapper" => Ok(ObjectiveKind::Wrapper),
            "multi_objective" | "multi-objective" | "multiobjective" => Ok(ObjectiveKind::MultiObjective),
            other => Err(Error::Config(format!("unknown objective kind {other:?}"))),
        }
    }
}

/// Quality term used inside the multi-objective scalarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quality {
    #[default]
    Merit,
    Wrapper,
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quality::Merit => "merit",
            Quality::Wrapper => "wrapper",
        })
    }
}

impl FromStr for Quality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "merit" | "merits" => Ok(Quality::Merit),
            "wrapper" => Ok(Quality::Wrapper),
            other => Err(Error::Config(format!("unknown quality {other:?}"))),
        }
    }
}

/// Dataset-independent description of an objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub quality: Quality,
    pub w_quality: f64,
    pub w_parsimony: f64,
    /// Folds for wrapper scoring.
    pub folds: usize,
    pub seed: u64,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        Self {
            kind: ObjectiveKind::Merit,
            quality: Quality::Merit,
            w_quality: 0.9,
            w_parsimony: 0.1,
            folds: 3,
            seed: 1,
        }
    }
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_quality >= 0.0 && self.w_parsimony >= 0.0) {
            return Err(Error::Config("objective weights must be nonnegative".into()));
        }
        if ((self.w_quality + self.w_parsimony) - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "objective weights must sum to 1, got {} + {}",
                self.w_quality, self.w_parsimony
            )));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "objective.folds must be >= 2, got {}",
                self.folds
            )));
        }
        Ok(())
    }
}

/// An objective bound to a dataset.
pub struct Objective {
    spec: ObjectiveSpec,
    dataset: Arc<Dataset>,
    merit: Option<MeritTable>,
    wrapper: Option<NetworkConfig>,
}

impl Objective {
    /// Binds `spec` to `dataset`. Wrapper scoring (directly or as the
    /// multi-objective quality term) requires `wrapper_config`.
    pub fn new(spec: ObjectiveSpec, dataset: Arc<Dataset>, wrapper_config: Option<NetworkConfig>) -> Result<Self> {
        spec.validate()?;
        let uses_wrapper = spec.kind == ObjectiveKind::Wrapper
            || (spec.kind == ObjectiveKind::MultiObjective && spec.quality == Quality::Wrapper);
        if uses_wrapper && wrapper_config.is_none() {
            return Err(Error::Config("wrapper objective requires a network config".into()));
        }
        let merit = (!uses_wrapper).then(|| MeritTable::new(&dataset));
        Ok(Self {
            spec,
            dataset,
            merit,
            wrapper: wrapper_config,
        })
    }

    pub fn merit(dataset: Arc<Dataset>) -> Self {
        Self::new(ObjectiveSpec::default(), dataset, None).expect("default spec is valid")
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    fn quality(&self, mask: &FeatureMask, which: Quality) -> Result<f64> {
        match which {
            Quality::Merit => self
                .merit
                .as_ref()
                .expect("merit table built for merit objectives")
                .merit(mask),
            Quality::Wrapper => wrapper_accuracy(
                &self.dataset,
                mask,
                self.wrapper.as_ref().expect("checked in Objective::new"),
                self.spec.folds,
                self.spec.seed,
            ),
        }
    }

    /// Scores a mask; higher is better.
    pub fn score(&self, mask: &FeatureMask) -> Result<f64> {
        mask.check_for(self.dataset.n_features())?;
        match self.spec.kind {
            ObjectiveKind::Merit => self.quality(mask, Quality::Merit),
            ObjectiveKind::Wrapper => self.quality(mask, Quality::Wrapper),
            ObjectiveKind::MultiObjective => {
                let d = mask.len() as f64;
                let parsimony = 1.0 - mask.popcount() as f64 / d;
                let quality = if self.spec.w_quality > 0.0 {
                    self.quality(mask, self.spec.quality)?
                } else {
                    0.0
                };
                Ok(self.spec.w_quality * quality + self.spec.w_parsimony * parsimony)
            }
        }
    }
}

impl MaskObjective for Objective {
    fn score(&self, mask: &FeatureMask) -> Result<f64> {
        Objective::score(self, mask)
    }
}
