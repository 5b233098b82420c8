//! CSV input and simulated-series output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use quantile_spectra::TimeSeriesMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("column '{0}' not found in header")]
    MissingColumn(String),

    #[error("cannot parse {value:?} as a number at row {row}, column '{column}'")]
    Parse { row: usize, column: String, value: String },

    #[error("input has no data rows")]
    Empty,

    #[error(transparent)]
    Series(#[from] quantile_spectra::Error),
}

/// Reads the named columns (all columns when `columns` is `None`).
///
/// Rows are counted from 1 for the first data row; `NaN`, infinities and
/// empty cells are parse errors.
pub fn load_csv(path: &Path, columns: Option<&[String]>) -> Result<TimeSeriesMatrix, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let selected: Vec<usize> = match columns {
        None => (0..header.len()).collect(),
        Some(names) => names
            .iter()
            .map(|name| {
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| DataError::MissingColumn(name.clone()))
            })
            .collect::<Result<_, _>>()?,
    };
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); selected.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        for (col, &idx) in data.iter_mut().zip(&selected) {
            let cell = record.get(idx).unwrap_or("").trim();
            let parsed = cell.parse::<f64>().ok().filter(|v| v.is_finite());
            match parsed {
                Some(v) => col.push(v),
                None => {
                    return Err(DataError::Parse {
                        row: i + 1,
                        column: header[idx].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
    }
    if data.first().is_none_or(Vec::is_empty) {
        return Err(DataError::Empty);
    }
    let names = selected.iter().map(|&i| header[i].clone()).collect();
    Ok(TimeSeriesMatrix::from_columns(data, names)?)
}

pub fn write_series_csv(x: &TimeSeriesMatrix, path: &Path) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", x.names().join(","))?;
    let mut line = String::new();
    for t in 0..x.n() {
        line.clear();
        for j in 0..x.d() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.16e}", x.get(t, j)));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}
