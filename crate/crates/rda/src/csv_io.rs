//! Comma-separated datasets: one sample per row, one column holding the label.
//!
//! Rows and columns in error messages are 1-based and count the header line
//! when there is one.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rda_core::nalgebra::DMatrix;
use rda_core::LabeledDataset;
use thiserror::Error;

use crate::error::{Error, Result};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("no data rows")]
    Empty,
    #[error("row {row} has {got} fields, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("row {row}, column {column}: {cell:?} is not a number")]
    NotNumeric { row: usize, column: usize, cell: String },
    #[error("row {row}, column {column}: label {cell:?} is not an integer")]
    BadLabel { row: usize, column: usize, cell: String },
    #[error("label column {column} is outside the {width} columns")]
    LabelColumn { column: usize, width: usize },
    #[error("a row needs at least one feature besides the label")]
    NoFeatures,
    #[error("row {row}: {source}")]
    Read {
        row: usize,
        #[source]
        source: csv::Error,
    },
}

fn parse_label(cell: &str) -> Option<i64> {
    cell.parse::<i64>().ok().or_else(|| {
        let v = cell.parse::<f64>().ok()?;
        (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
    })
}

/// Parses CSV text. `label_column` is 0-based and defaults to the last column.
pub fn parse_csv<R: std::io::Read>(
    reader: R,
    label_column: Option<usize>,
    has_header: bool,
) -> Result<LabeledDataset, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let first_row = if has_header { 2 } else { 1 };
    let mut width = None;
    let mut features: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = first_row + i;
        let record = record.map_err(|source| CsvError::Read { row, source })?;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CsvError::Ragged {
                row,
                expected,
                got: record.len(),
            });
        }
        let label_at = label_column.unwrap_or(expected.saturating_sub(1));
        if label_at >= expected {
            return Err(CsvError::LabelColumn {
                column: label_at,
                width: expected,
            });
        }
        if expected < 2 {
            return Err(CsvError::NoFeatures);
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_at {
                labels.push(parse_label(cell).ok_or_else(|| CsvError::BadLabel {
                    row,
                    column: c + 1,
                    cell: cell.to_string(),
                })?);
            } else {
                let v = cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CsvError::NotNumeric {
                        row,
                        column: c + 1,
                        cell: cell.to_string(),
                    })?;
                features.push(v);
            }
        }
    }
    let Some(width) = width else {
        return Err(CsvError::Empty);
    };
    let dim = width - 1;
    let data = DMatrix::from_column_slice(dim, labels.len(), &features);
    // Every row was validated, so only an all-empty file can fail here.
    LabeledDataset::from_raw_labels(data, &labels).map_err(|_| CsvError::Empty)
}

pub fn load_csv(path: &Path, label_column: Option<usize>, has_header: bool) -> Result<LabeledDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, label_column, has_header).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes one row per sample with the original label value last, no header.
pub fn write_csv_to<W: Write>(mut out: W, ds: &LabeledDataset) -> std::io::Result<()> {
    let mut line = String::new();
    for (j, &label) in ds.labels().iter().enumerate() {
        line.clear();
        for v in ds.data().column(j).iter() {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&ds.label_values()[label].to_string());
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

pub fn write_csv(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(BufWriter::new(file), ds).map_err(|e| Error::io(path, e))
}
