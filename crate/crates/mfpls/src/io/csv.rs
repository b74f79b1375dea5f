//! CSV contracts.
//!
//! Dataset files carry one functional dimension each: the first row holds
//! the grid coordinates (2-D domains use two header rows, u then v, with
//! the u index varying fastest), every following row is one observation.
//! Responses live in a separate single-column file whose header names the
//! task: `y` for regression, `label` for classification. All values are
//! decimal with '.' separators, comma-delimited, UTF-8.

use std::path::Path;

use nalgebra::DMatrix;

use crate::basis::SamplingGrid;
use crate::error::{Error, Result};
use crate::fdata::{RawDim, RawObservations};
use crate::sim::run::{BetaDumpPoint, ResultRow};

fn parse_row(record: &csv::StringRecord, path: &Path, row: usize) -> Result<Vec<f64>> {
    record
        .iter()
        .enumerate()
        .map(|(col, field)| {
            field.trim().parse::<f64>().map_err(|_| {
                Error::Validation(format!(
                    "{}: row {}, column {}: '{}' is not a number",
                    path.display(),
                    row + 1,
                    col + 1,
                    field
                ))
            })
        })
        .collect()
}

fn read_numeric_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push(parse_row(&record, path, i)?);
    }
    Ok(rows)
}

/// Read one functional dimension. `two_d` selects the two-header-row
/// rectangle layout.
pub fn read_raw_dim(path: &Path, two_d: bool) -> Result<RawDim> {
    let rows = read_numeric_rows(path)?;
    let header_rows = if two_d { 2 } else { 1 };
    if rows.len() <= header_rows {
        return Err(Error::Validation(format!(
            "{}: need grid header row(s) and at least one observation",
            path.display()
        )));
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Validation(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                i + 1,
                r.len(),
                width
            )));
        }
    }
    let grid = if two_d {
        let u = &rows[0];
        let v = &rows[1];
        SamplingGrid::TwoD(u.iter().cloned().zip(v.iter().cloned()).collect())
    } else {
        SamplingGrid::OneD(rows[0].clone())
    };
    let data = &rows[header_rows..];
    let values = DMatrix::from_fn(data.len(), width, |i, j| data[i][j]);
    Ok(RawDim { grid, values })
}

/// Write one functional dimension in the matching layout.
pub fn write_raw_dim(path: &Path, dim: &RawDim) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    match &dim.grid {
        SamplingGrid::OneD(pts) => {
            w.write_record(pts.iter().map(|v| v.to_string()))?;
        }
        SamplingGrid::TwoD(pts) => {
            w.write_record(pts.iter().map(|p| p.0.to_string()))?;
            w.write_record(pts.iter().map(|p| p.1.to_string()))?;
        }
    }
    for i in 0..dim.values.nrows() {
        w.write_record(dim.values.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    Regression,
    Classification,
}

/// Read the response file; the header decides the task.
pub fn read_response(path: &Path) -> Result<(Vec<f64>, ResponseKind)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Validation(format!("{}: empty response file", path.display())))??;
    let name = header.get(0).unwrap_or("").trim().to_lowercase();
    let kind = match name.as_str() {
        "y" => ResponseKind::Regression,
        "label" => ResponseKind::Classification,
        other => {
            return Err(Error::Validation(format!(
                "{}: response header must be 'y' or 'label', got '{other}'",
                path.display()
            )))
        }
    };
    let mut values = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let v = parse_row(&record, path, i + 1)?;
        if v.len() != 1 {
            return Err(Error::Validation(format!(
                "{}: response rows must hold a single value",
                path.display()
            )));
        }
        values.push(v[0]);
    }
    if kind == ResponseKind::Classification {
        for &v in &values {
            if v != 0.0 && v != 1.0 {
                return Err(Error::Validation(format!(
                    "{}: labels must be 0 or 1, got {v}",
                    path.display()
                )));
            }
        }
    }
    Ok((values, kind))
}

pub fn write_response(path: &Path, values: &[f64], kind: ResponseKind) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record([match kind {
        ResponseKind::Regression => "y",
        ResponseKind::Classification => "label",
    }])?;
    for v in values {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Classification predictions: id, score, predicted class.
pub fn write_classification_predictions(path: &Path, gamma: &[f64], classes: &[u8]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["id", "gamma", "predicted_class"])?;
    for (i, (g, c)) in gamma.iter().zip(classes).enumerate() {
        w.write_record([i.to_string(), g.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Regression predictions: id, predicted value.
pub fn write_regression_predictions(path: &Path, preds: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["id", "y_hat"])?;
    for (i, p) in preds.iter().enumerate() {
        w.write_record([i.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Experiment results table.
pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["setting", "param", "method", "metric", "mean", "std", "replications", "seed"])?;
    for r in rows {
        w.write_record([
            r.setting.clone(),
            r.param.clone(),
            r.method.clone(),
            r.metric.clone(),
            r.mean.to_string(),
            r.std.to_string(),
            r.replications.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Coefficient-function dump for plotting: dimension, coordinate(s), value.
pub fn write_beta_dump(path: &Path, points: &[BetaDumpPoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["dim", "x1", "x2", "value"])?;
    for p in points {
        w.write_record([
            p.dim.to_string(),
            p.x1.to_string(),
            p.x2.map(|v| v.to_string()).unwrap_or_default(),
            p.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a full dataset: one file per dimension plus the response file.
pub fn read_dataset(
    dim_paths: &[std::path::PathBuf],
    two_d: &[bool],
    response_path: &Path,
) -> Result<(RawObservations, Vec<f64>, ResponseKind)> {
    if dim_paths.len() != two_d.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} dimension files vs {} layout flags",
            dim_paths.len(),
            two_d.len()
        )));
    }
    let dims = dim_paths
        .iter()
        .zip(two_d)
        .map(|(p, &t)| read_raw_dim(p, t))
        .collect::<Result<Vec<_>>>()?;
    let raw = RawObservations::new(dims)?;
    let (y, kind) = read_response(response_path)?;
    if y.len() != raw.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} responses vs {} observations",
            y.len(),
            raw.n()
        )));
    }
    Ok((raw, y, kind))
}
