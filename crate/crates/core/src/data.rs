//! Datasets: CSV ingestion, synthetic Gaussian blobs, standardization,
//! one-hot targets and seeded splits.
//!
//! Features are stored `d × n` (one column per sample) to match the network
//! layout.

use std::f64::consts::TAU;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{seeded_rng, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if labels.len() != features.cols() {
            return Err(Error::Shape {
                op: "Dataset::new",
                lhs: features.shape(),
                rhs: (labels.len(), 1),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::data(
                None,
                format!("label {bad} out of range for {class_count} classes"),
            ));
        }
        Ok(Self {
            features,
            labels,
            class_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.features.rows()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Samples at `indices`, in that order; keeps the class count.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let d = self.dim();
        let n = indices.len();
        let features = Matrix::from_fn(d, n, |i, j| self.features.get(i, indices[j]))?;
        let labels = indices.iter().map(|&j| self.labels[j]).collect();
        Dataset::new(features, labels, self.class_count)
    }
}

/// Where the class label sits in each CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    First,
    #[default]
    Last,
}

/// Integer labels, or a single ASCII capital letter (`A` = 0, …, `Z` = 25).
fn parse_label(field: &str) -> Option<usize> {
    if let Ok(v) = field.parse::<usize>() {
        return Some(v);
    }
    match field.as_bytes() {
        [c @ b'A'..=b'Z'] => Some((c - b'A') as usize),
        _ => None,
    }
}

fn parse_feature(field: &str) -> Option<f64> {
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn split_fields(record: &csv::StringRecord, label: LabelColumn) -> (&str, Vec<&str>) {
    let fields: Vec<&str> = record.iter().collect();
    match label {
        LabelColumn::First => (fields[0], fields[1..].to_vec()),
        LabelColumn::Last => (fields[fields.len() - 1], fields[..fields.len() - 1].to_vec()),
    }
}

/// Loads a comma-separated file with one sample per row.
///
/// A first row containing any field that does not parse (a non-numeric
/// feature, or a label that is neither an integer nor a capital letter) is
/// taken as a header and skipped. `class_count` is the largest label plus one.
pub fn load_csv(path: impl AsRef<Path>, label: LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(csv_error)?;

    let mut width: Option<usize> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut first = true;

    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < 2 {
            return Err(Error::data(line, "need at least one feature and a label"));
        }
        let (label_field, feature_fields) = split_fields(&record, label);
        let parsed: Option<Vec<f64>> = feature_fields.iter().map(|f| parse_feature(f)).collect();
        let parsed_label = parse_label(label_field);

        if first {
            first = false;
            if parsed.is_none() || parsed_label.is_none() {
                continue;
            }
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::data(
                    line,
                    format!("expected {w} fields, found {}", record.len()),
                ))
            }
            _ => {}
        }
        let features = parsed.ok_or_else(|| Error::data(line, "feature is not a finite number"))?;
        let l = parsed_label
            .ok_or_else(|| Error::data(line, format!("label {label_field:?} is not a non-negative integer")))?;
        columns.push(features);
        labels.push(l);
    }

    if columns.is_empty() {
        return Err(Error::data(None, "no data rows"));
    }
    let d = columns[0].len();
    let n = columns.len();
    let features = Matrix::from_fn(d, n, |i, j| columns[j][i])?;
    let class_count = labels.iter().max().map_or(0, |m| m + 1);
    Dataset::new(features, labels, class_count)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::data(line, format!("{other:?}")),
    }
}

/// `classes` Gaussian blobs with identity covariance.
///
/// Centers sit on a circle of radius `separation` in the first two
/// coordinates (on a line with spacing `separation` when `dim == 1`).
/// Samples are ordered class by class.
pub fn synth_blobs(classes: usize, per_class: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if classes == 0 || per_class == 0 || dim == 0 {
        return Err(Error::param(format!(
            "blob counts must be positive (classes={classes}, per_class={per_class}, dim={dim})"
        )));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::param(format!("separation must be positive, got {separation}")));
    }
    let center = |k: usize, i: usize| -> f64 {
        if dim == 1 {
            return separation * k as f64;
        }
        let theta = TAU * k as f64 / classes as f64;
        match i {
            0 => separation * theta.cos(),
            1 => separation * theta.sin(),
            _ => 0.0,
        }
    };

    let n = classes * per_class;
    let mut rng = seeded_rng(seed);
    let mut data = vec![0.0; dim * n];
    let mut labels = Vec::with_capacity(n);
    for k in 0..classes {
        for s in 0..per_class {
            let col = k * per_class + s;
            for i in 0..dim {
                let z: f64 = rng.sample(StandardNormal);
                data[i * n + col] = center(k, i) + z;
            }
            labels.push(k);
        }
    }
    Dataset::new(Matrix::new(dim, n, data)?, labels, classes)
}

/// Per-feature zero mean and unit (population) variance. Constant features
/// are centered only.
pub fn standardize(ds: &Dataset) -> Result<Dataset> {
    let (d, n) = ds.features.shape();
    if n < 2 {
        return Err(Error::param("standardize needs at least two samples"));
    }
    let mut data = ds.features.as_slice().to_vec();
    for row in data.chunks_mut(n) {
        let mean = row.iter().sum::<f64>() / n as f64;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        let scale = row.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
        let divisor = if std <= 1e-12 * scale { 1.0 } else { std };
        for x in row.iter_mut() {
            *x = (*x - mean) / divisor;
        }
    }
    Dataset::new(Matrix::new(d, n, data)?, ds.labels.clone(), ds.class_count)
}

/// `class_count × n` indicator matrix.
pub fn one_hot(ds: &Dataset) -> Matrix {
    let n = ds.len();
    let mut m = Matrix::zeros(ds.class_count.max(1), n.max(1));
    for (j, &l) in ds.labels.iter().enumerate() {
        m.set(l, j, 1.0);
    }
    m
}

/// Seeded shuffled partition of `0..n` into `round(n·train_fraction)` training
/// indices and the rest; both sides are kept non-empty.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::param("split needs at least two samples"));
    }
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded_rng(seed));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds.len(), train_fraction, seed)?;
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}
