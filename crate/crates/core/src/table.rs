//! Two-column numeric tables read from CSV files with a header row.

use std::path::Path;

use crate::error::{Error, Result};

/// Reads `(first, second)` pairs, rejecting files whose first row is numeric
/// (a missing header would silently drop a data point).
pub fn read_two_columns(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 2 {
        return Err(Error::Config(format!("{}: expected 2 columns, header has {}", path.display(), headers.len())));
    }
    if headers.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(Error::Config(format!("{}: header row required", path.display())));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |j: usize| -> Result<f64> {
            let field = record.get(j).unwrap_or("");
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("{}: row {}: `{field}` is not a finite number", path.display(), i + 2)))
        };
        if record.len() != 2 {
            return Err(Error::Config(format!("{}: row {}: expected 2 fields", path.display(), i + 2)));
        }
        rows.push((parse(0)?, parse(1)?));
    }
    Ok(rows)
}
