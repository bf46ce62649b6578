//! Sample × feature datasets and the transforms the pipeline applies to them.

mod csv;
mod mask;

pub use self::csv::{load_csv, read_manifest, write_csv, LabelColumn, LoadOptions, ManifestEntry, NanPolicy};
pub use self::mask::FeatureMask;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rng::{self, keys};

/// Rectangular real-valued dataset with categorical labels.
///
/// Rows are samples, columns are features. Values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    x: Vec<f64>,
    y: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset and checks every invariant.
    ///
    /// `class_names[k]` is the original label of class `k`; its length is the
    /// class count.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
        x: Vec<f64>,
        y: Vec<usize>,
    ) -> Result<Self> {
        let d = feature_names.len();
        let n = y.len();
        let c = class_names.len();
        if d == 0 {
            return Err(Error::Data("dataset has no features".into()));
        }
        if n == 0 {
            return Err(Error::Data("dataset has no samples".into()));
        }
        if x.len() != n * d {
            return Err(Error::Shape(format!(
                "expected {n}x{d}={} values, got {}",
                n * d,
                x.len()
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        let mut seen = HashSet::with_capacity(d);
        for f in &feature_names {
            if !seen.insert(f.as_str()) {
                return Err(Error::Data(format!("duplicate feature name {f:?}")));
            }
        }
        if c < 2 {
            return Err(Error::Data(format!("need at least 2 classes, found {c}")));
        }
        let mut counts = vec![0usize; c];
        for &label in &y {
            if label >= c {
                return Err(Error::Data(format!("label {label} outside [0, {c})")));
            }
            counts[label] += 1;
        }
        if let Some(k) = counts.iter().position(|&n| n == 0) {
            return Err(Error::Data(format!("class {k} ({:?}) has no samples", class_names[k])));
        }
        Ok(Self {
            name: name.into(),
            feature_names,
            class_names,
            x,
            y,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Original label text per class index (first-appearance order when loaded).
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    /// Row-major feature values.
    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.x[i * d..(i + 1) * d]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.n_features() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_samples()).map(|i| self.value(i, col)).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &label in &self.y {
            counts[label] += 1;
        }
        counts
    }

    /// Samples at `indices`, in the given order. The class list is kept even
    /// if some class ends up without samples, so this is not a validated
    /// `Dataset` constructor; use it for training/evaluation partitions.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut x = Vec::with_capacity(indices.len() * d);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            x,
            y,
        }
    }

    /// Stacks the rows of `other` under this dataset's rows.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.feature_names != other.feature_names {
            return Err(Error::Shape("datasets have different features".into()));
        }
        // Relabel `other` through class names so differing first-appearance
        // orders still line up.
        let mut class_names = self.class_names.clone();
        let mut y = self.y.clone();
        for &label in &other.y {
            let name = &other.class_names[label];
            let idx = match class_names.iter().position(|c| c == name) {
                Some(i) => i,
                None => {
                    class_names.push(name.clone());
                    class_names.len() - 1
                }
            };
            y.push(idx);
        }
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        Dataset::new(self.name.clone(), self.feature_names.clone(), class_names, x, y)
    }
}

/// Disjoint train/test partition of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Maps every feature column to [0, 1] with `(v - min) / (max - min)`.
/// Constant columns become 0.0.
pub fn minmax_normalize(ds: &Dataset) -> Dataset {
    let n = ds.n_samples();
    let d = ds.n_features();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..n {
        for (j, &v) in ds.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let mut x = ds.x.clone();
    for row in x.chunks_mut(d) {
        for (j, v) in row.iter_mut().enumerate() {
            let range = hi[j] - lo[j];
            *v = if range > 0.0 {
                ((*v - lo[j]) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    Dataset { x, ..ds.clone() }
}

fn indices_by_class(labels: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &label) in labels.iter().enumerate() {
        by_class[label].push(i);
    }
    by_class
}

/// Stratified holdout split.
///
/// The overall train size is `round(n * train_fraction)`, apportioned over the
/// classes by largest remainder so each class is within one sample of its exact
/// share. Every class keeps at least one sample on each side.
pub fn stratified_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let counts = ds.class_counts();
    if let Some(k) = counts.iter().position(|&c| c < 2) {
        return Err(Error::Split(format!(
            "class {k} ({:?}) has fewer than 2 samples",
            ds.class_names[k]
        )));
    }

    let n = ds.n_samples();
    let target = (n as f64 * train_fraction).round() as usize;
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * train_fraction).collect();
    let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // Largest fractional remainder first; ties go to the lower class index.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut remaining = target.saturating_sub(take.iter().sum());
    for &k in order.iter().cycle().take(order.len()) {
        if remaining == 0 {
            break;
        }
        take[k] += 1;
        remaining -= 1;
    }
    for (k, t) in take.iter_mut().enumerate() {
        *t = (*t).clamp(1, counts[k] - 1);
    }

    let mut rng = rng::substream(seed, keys::SPLIT, 0);
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for (k, mut members) in indices_by_class(&ds.y, ds.n_classes()).into_iter().enumerate() {
        rng::shuffle(&mut members, &mut rng);
        let (tr, te) = members.split_at(take[k]);
        train_indices.extend_from_slice(tr);
        test_indices.extend_from_slice(te);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    Ok(SplitPair {
        train: ds.subset(&train_indices),
        test: ds.subset(&test_indices),
        train_indices,
        test_indices,
    })
}

/// Stratified k-fold assignment: returns the test indices of each fold.
///
/// Each class is shuffled and dealt round-robin, continuing the deal across
/// classes so fold sizes differ by at most one. Classes smaller than `k` simply
/// do not appear in every fold.
pub fn stratified_kfold(labels: &[usize], n_classes: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Evaluation(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Evaluation(format!(
            "{k} folds requested but only {} samples",
            labels.len()
        )));
    }
    let mut rng = rng::substream(seed, keys::FOLDS, 0);
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for mut members in indices_by_class(labels, n_classes) {
        rng::shuffle(&mut members, &mut rng);
        for i in members {
            folds[slot % k].push(i);
            slot += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Keeps the columns where the mask is set, in their original order.
pub fn apply_mask(ds: &Dataset, mask: &FeatureMask) -> Result<Dataset> {
    mask.check_for(ds.n_features())?;
    let keep = mask.indices();
    let mut x = Vec::with_capacity(ds.n_samples() * keep.len());
    for i in 0..ds.n_samples() {
        let row = ds.row(i);
        x.extend(keep.iter().map(|&j| row[j]));
    }
    Ok(Dataset {
        feature_names: keep.iter().map(|&j| ds.feature_names[j].clone()).collect(),
        x,
        ..ds.clone()
    })
}
