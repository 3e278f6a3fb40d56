//! P-value input: plain line-per-value files with an optional `p` header, or
//! a named column of a CSV file.

use crate::CliError;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

pub fn read_pvalues(path: &Path, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let values = match column {
        Some(name) => read_csv_column(path, name)?,
        None => read_plain(path)?,
    };
    if values.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no p-values found",
            path.display()
        )));
    }
    Ok(values)
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_value(raw: &str, path: &Path, line: u64) -> Result<f64, CliError> {
    let value: f64 = raw.trim().parse().map_err(|_| {
        CliError::Data(format!(
            "{}:{line}: not a number: '{}'",
            path.display(),
            raw.trim()
        ))
    })?;
    if !(0.0..=1.0).contains(&value) {
        return Err(CliError::Data(format!(
            "{}:{line}: p-value outside [0, 1]: {value}",
            path.display()
        )));
    }
    Ok(value)
}

fn read_plain(path: &Path) -> Result<Vec<f64>, CliError> {
    let reader = BufReader::new(open(path)?);
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 && trimmed.eq_ignore_ascii_case("p") {
            continue;
        }
        values.push(parse_value(trimmed, path, idx as u64 + 1)?);
    }
    Ok(values)
}

fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| {
            CliError::Data(format!(
                "{}: no column named '{column}' (have: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record
            .position()
            .map(|pos| pos.line())
            .unwrap_or_default();
        let raw = record.get(idx).ok_or_else(|| {
            CliError::Data(format!(
                "{}:{line}: row has no field for column '{column}'",
                path.display()
            ))
        })?;
        values.push(parse_value(raw, path, line)?);
    }
    Ok(values)
}
