//! CSV input: a header row naming the response column `y` (case sensitive)
//! plus one numeric column per covariate.

use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{CliError, CliResult};

/// A parsed dataset: response `y`, covariate matrix `x` and the covariate
/// names in their original column order.
#[derive(Debug, Clone)]
pub struct InputData {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub names: Vec<String>,
}

/// Read a CSV file with headers into an [`InputData`].
///
/// Parse failures report the 1-based line and the absolute byte offset of the
/// offending field so they can be located in large files.
pub fn read_csv(path: &Path) -> CliResult<InputData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| map_csv_error(path, e))?;

    let headers = reader
        .headers()
        .map_err(|e| map_csv_error(path, e))?
        .clone();
    let y_positions: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| (h == "y").then_some(i))
        .collect();
    let y_col = match y_positions.as_slice() {
        [single] => *single,
        [] => {
            return Err(CliError::Input(format!(
                "{}: no column named 'y' (the response column name is case sensitive)",
                path.display()
            )))
        }
        _ => {
            return Err(CliError::Input(format!(
                "{}: more than one column named 'y'",
                path.display()
            )))
        }
    };
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != y_col)
        .map(|(_, h)| h.to_string())
        .collect();
    if names.is_empty() {
        return Err(CliError::Input(format!(
            "{}: needs at least one covariate column besides 'y'",
            path.display()
        )));
    }

    let mut y = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| map_csv_error(path, e))?;
        if record.len() != headers.len() {
            let line = record
                .position()
                .map(|p| p.line().to_string())
                .unwrap_or_else(|| "?".to_string());
            return Err(CliError::Input(format!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                headers.len(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(names.len());
        for (i, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                let (line, byte) = field_location(&record, i);
                CliError::Input(format!(
                    "{}: line {line}, byte {byte}: cannot parse '{field}' in column '{}' as a number",
                    path.display(),
                    headers.get(i).unwrap_or("?")
                ))
            })?;
            if i == y_col {
                y.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }

    let n = rows.len();
    if n < 2 {
        return Err(CliError::Input(format!(
            "{}: needs at least 2 data rows, found {n}",
            path.display()
        )));
    }
    let p = names.len();
    let mut x = Array2::zeros((n, p));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    Ok(InputData {
        x,
        y: Array1::from_vec(y),
        names,
    })
}

/// Best-effort (line, absolute byte offset) of field `i` within `record`.
fn field_location(record: &csv::StringRecord, i: usize) -> (u64, u64) {
    match record.position() {
        Some(pos) => {
            let byte = pos.byte()
                + record
                    .range(i)
                    .map(|range| range.start as u64)
                    .unwrap_or(0);
            (pos.line(), byte)
        }
        None => (0, 0),
    }
}

fn map_csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        CliError::Io(format!("{}: {e}", path.display()))
    } else {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}
