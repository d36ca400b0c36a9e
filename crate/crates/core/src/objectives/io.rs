//! Labeled dataset files: CSV with the label in the first column, or JSON
//! `{"y": [...], "X": [[...]]}`.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw labels and feature rows as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub labels: Array1<f64>,
    pub features: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct JsonDataset {
    y: Vec<f64>,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
}

/// Reads a dataset; `.json` files use the JSON layout, anything else is CSV.
/// `header` skips the first CSV row.
pub fn read_dataset(path: impl AsRef<Path>, header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let raw: JsonDataset = serde_json::from_reader(std::fs::File::open(path)?)?;
        return from_rows(raw.y, raw.x);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut values = record.iter().map(|field| {
            field.parse::<f64>().map_err(|_| {
                Error::invalid(format!(
                    "row {}: cannot parse {field:?} as a number",
                    line + 1
                ))
            })
        });
        let y = values
            .next()
            .ok_or_else(|| Error::invalid(format!("row {} is empty", line + 1)))??;
        labels.push(y);
        rows.push(values.collect::<Result<Vec<f64>>>()?);
    }
    from_rows(labels, rows)
}

fn from_rows(labels: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Dataset> {
    if labels.len() != rows.len() {
        return Err(Error::dim(format!(
            "{} labels for {} rows",
            labels.len(),
            rows.len()
        )));
    }
    let d = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || d == 0 {
        return Err(Error::invalid("dataset has no features"));
    }
    if let Some(k) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::dim(format!(
            "row {} has {} features, expected {d}",
            k + 1,
            rows[k].len()
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let features =
        Array2::from_shape_vec((labels.len(), d), flat).map_err(|e| Error::dim(e.to_string()))?;
    Ok(Dataset {
        labels: Array1::from(labels),
        features,
    })
}

/// Writes the headerless CSV layout read by [`read_dataset`].
pub fn write_dataset_csv(
    path: impl AsRef<Path>,
    labels: &Array1<f64>,
    features: &Array2<f64>,
) -> Result<()> {
    if labels.len() != features.nrows() {
        return Err(Error::dim("one label per feature row expected"));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (y, row) in labels.iter().zip(features.rows()) {
        write!(out, "{y}")?;
        for v in row {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
