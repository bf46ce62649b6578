use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::Dataset;
use crate::error::{Error, Result};

/// Which column holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
}

/// What to do with `NaN` or empty cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NanPolicy {
    Replace(f64),
    Reject,
}

impl Default for NanPolicy {
    fn default() -> Self {
        NanPolicy::Replace(100.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoadOptions {
    pub label_column: LabelColumn,
    pub nan_replacement: NanPolicy,
}

enum Cell {
    Number(f64),
    Missing,
    Text,
}

fn classify(cell: &str) -> Cell {
    let t = cell.trim();
    if t.is_empty() || t == "?" || t.eq_ignore_ascii_case("na") {
        return Cell::Missing;
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_nan() => Cell::Missing,
        Ok(v) => Cell::Number(v),
        Err(_) => Cell::Text,
    }
}

fn unquote(cell: &str) -> &str {
    let t = cell.trim();
    t.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(t)
}

/// Loads a comma-separated dataset.
///
/// The first row is a header when any of its feature cells is non-numeric.
/// Labels are mapped to class indices in first-appearance order; the original
/// label strings are kept as the dataset's class names.
pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(&text, name, options)
}

pub(crate) fn parse_csv(text: &str, name: String, options: &LoadOptions) -> Result<Dataset> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim_end_matches('\r')))
        .filter(|(_, line)| !line.trim().is_empty())
        .peekable();

    let Some(&(first_row, first_line)) = rows.peek() else {
        return Err(Error::Data("file contains no rows".into()));
    };
    let arity = first_line.split(',').count();
    if arity < 2 {
        return Err(Error::Parse {
            row: first_row,
            message: "need at least one feature column and a label column".into(),
        });
    }
    let label_idx = match options.label_column {
        LabelColumn::Last => arity - 1,
        LabelColumn::Index(i) if i < arity => i,
        LabelColumn::Index(i) => {
            return Err(Error::Parse {
                row: first_row,
                message: format!("label column {i} out of range for {arity} columns"),
            })
        }
    };

    let is_header = first_line
        .split(',')
        .enumerate()
        .any(|(j, cell)| j != label_idx && matches!(classify(unquote(cell)), Cell::Text));
    let feature_names: Vec<String> = if is_header {
        rows.next();
        first_line
            .split(',')
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, cell)| unquote(cell).to_string())
            .collect()
    } else {
        (0..arity - 1).map(|j| format!("f{j}")).collect()
    };

    let mut class_names: Vec<String> = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (row, line) in rows {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != arity {
            return Err(Error::Parse {
                row,
                message: format!("expected {arity} fields, found {}", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let value = match classify(unquote(cell)) {
                Cell::Number(v) => v,
                Cell::Missing => match options.nan_replacement {
                    NanPolicy::Replace(v) => v,
                    NanPolicy::Reject => {
                        return Err(Error::Data(format!("missing value at row {row}, column {}", j + 1)))
                    }
                },
                Cell::Text => {
                    return Err(Error::Parse {
                        row,
                        message: format!("non-numeric value {:?} in column {}", cell.trim(), j + 1),
                    })
                }
            };
            x.push(value);
        }
        let label = unquote(cells[label_idx]);
        if label.is_empty() {
            return Err(Error::Parse {
                row,
                message: "empty label".into(),
            });
        }
        let class = match class_names.iter().position(|c| c == label) {
            Some(k) => k,
            None => {
                class_names.push(label.to_string());
                class_names.len() - 1
            }
        };
        y.push(class);
    }
    if class_names.len() == 1 {
        return Err(Error::Data(format!("only one class ({:?}) present", class_names[0])));
    }
    Dataset::new(name, feature_names, class_names, x, y)
}

/// Writes a dataset as CSV with a header row and the label in the last column.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv_string(ds)).map_err(|e| Error::io(path, e))
}

pub(crate) fn to_csv_string(ds: &Dataset) -> String {
    let mut out = String::new();
    for name in ds.feature_names() {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("class\n");
    for i in 0..ds.n_samples() {
        for v in ds.row(i) {
            // {:?} prints the shortest representation that round-trips.
            let _ = write!(out, "{v:?},");
        }
        out.push_str(&ds.class_names()[ds.labels()[i]]);
        out.push('\n');
    }
    out
}

/// One `name = path` line of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
}

/// Reads a manifest. Relative paths resolve against the manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

pub(crate) fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, target)) = line.split_once('=') else {
            return Err(Error::Parse {
                row: i + 1,
                message: format!("expected `name = path`, got {line:?}"),
            });
        };
        let (name, target) = (name.trim(), target.trim());
        if name.is_empty() || target.is_empty() {
            return Err(Error::Parse {
                row: i + 1,
                message: "empty name or path".into(),
            });
        }
        let target = PathBuf::from(target);
        let path = if target.is_absolute() {
            target
        } else {
            base.join(target)
        };
        entries.push(ManifestEntry {
            name: name.to_string(),
            path,
        });
    }
    Ok(entries)
}
