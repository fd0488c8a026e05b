//! Sparse text datasets.
//!
//! One instance per line: a label (`1`, `+1`, `0` or `-1`) followed by
//! `index:value` pairs. An optional `#dim m` header fixes the feature-space
//! dimension; without it the dimension is one past the largest index seen.
//! Blank lines and other `#` lines are ignored. Explicit zero values are
//! dropped, since a zero is an absent feature.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use evcf_core::{Dataset, SparseInstance};

use crate::error::{HarnessError, Result};

type Row = (usize, Vec<(usize, f64)>, u8);

pub fn load_sparse_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_sparse_dataset(&text, path)
}

/// Parses dataset text; `origin` only labels error messages.
pub fn parse_sparse_dataset(text: &str, origin: impl AsRef<Path>) -> Result<Dataset> {
    let origin = origin.as_ref();
    let fail = |line: usize, column: usize, reason: String| HarnessError::Parse {
        path: origin.to_path_buf(),
        line,
        column,
        reason,
    };

    let mut declared: Option<usize> = None;
    // (line number, entries, label)
    let mut rows: Vec<Row> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(dim) = rest.trim_start().strip_prefix("dim") {
                if declared.is_some() || !rows.is_empty() {
                    return Err(fail(line_no, 1, "dimension header must come first and only once".into()));
                }
                let dim = dim.trim();
                declared = Some(
                    dim.parse()
                        .map_err(|_| fail(line_no, 1, format!("invalid dimension {dim:?}")))?,
                );
            }
            continue;
        }

        let mut tokens = tokens_with_columns(line);
        let (col, label) = tokens.next().expect("non-empty line has a token");
        let label = match label {
            "1" | "+1" => 1,
            "0" | "-1" => 0,
            other => return Err(fail(line_no, col, format!("invalid label {other:?}"))),
        };
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for (col, token) in tokens {
            let (idx, val) = token
                .split_once(':')
                .ok_or_else(|| fail(line_no, col, format!("expected index:value, got {token:?}")))?;
            let index: usize = idx
                .parse()
                .map_err(|_| fail(line_no, col, format!("invalid feature index {idx:?}")))?;
            let value: f64 = val
                .parse()
                .map_err(|_| fail(line_no, col + idx.len() + 1, format!("invalid feature value {val:?}")))?;
            if !value.is_finite() {
                return Err(fail(line_no, col + idx.len() + 1, format!("non-finite value {val:?}")));
            }
            if let Some(dim) = declared {
                if index >= dim {
                    return Err(fail(line_no, col, format!("index {index} outside declared dimension {dim}")));
                }
            }
            if entries.iter().any(|&(j, _)| j == index) {
                return Err(fail(line_no, col, format!("duplicate feature index {index}")));
            }
            if value != 0.0 {
                entries.push((index, value));
            }
        }
        rows.push((line_no, entries, label));
    }

    let dimension = declared.unwrap_or_else(|| {
        rows.iter()
            .flat_map(|(_, e, _)| e.iter().map(|&(j, _)| j + 1))
            .max()
            .unwrap_or(0)
    });
    let mut instances = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line_no, entries, label) in rows {
        let x = SparseInstance::from_unsorted(dimension, entries).map_err(|e| fail(line_no, 1, e.to_string()))?;
        instances.push(x);
        labels.push(label);
    }
    Dataset::new(dimension, instances, labels).map_err(|e| HarnessError::Data(e.to_string()))
}

/// Yields whitespace-separated tokens with their 1-based byte column.
fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let skip = rest.len() - rest.trim_start().len();
        rest = &rest[skip..];
        offset += skip;
        if rest.is_empty() {
            return None;
        }
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let token = &rest[..end];
        let col = offset + 1;
        rest = &rest[end..];
        offset += end;
        Some((col, token))
    })
}

pub fn format_sparse_dataset(d: &Dataset) -> String {
    let mut out = format!("#dim {}\n", d.dimension());
    for (x, &label) in d.instances().iter().zip(d.labels()) {
        out.push_str(if label == 1 { "1" } else { "0" });
        for (j, v) in x.iter() {
            write!(out, " {j}:{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_sparse_dataset(d: &Dataset, path: impl Into<PathBuf>) -> Result<()> {
    let path = path.into();
    fs::write(&path, format_sparse_dataset(d)).map_err(|e| HarnessError::io(path, e))
}
