//! Reading trace and aggregate CSVs back for plotting.

use std::path::Path;

use delayband::harness::{AGGREGATE_HEADER, TRACE_HEADER};
use delayband::plot::Series;

use crate::error::{CliError, CliResult};

/// Loads `(slot, normalized regret)` pairs from a file written by `run-*` or
/// `sweep`. Per-seed traces use `normalized_regret`, aggregates the mean.
pub fn read_series(path: &Path, label: String) -> CliResult<Series> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_series(&text, &path.display().to_string(), label)
}

pub fn parse_series(text: &str, source: &str, label: String) -> CliResult<Series> {
    let mut lines = text.lines().enumerate();
    let column = match lines.next().map(|(_, h)| h.trim()) {
        Some(h) if h == TRACE_HEADER => 4,
        Some(h) if h == AGGREGATE_HEADER => 1,
        _ => {
            return Err(CliError::Schema(format!(
                "{source}:1: not a trace or aggregate CSV (unexpected header)"
            )))
        }
    };
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let number = |idx: usize| -> CliResult<f64> {
            fields
                .get(idx)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| CliError::Schema(format!("{source}:{}: malformed row", i + 1)))
        };
        points.push((number(0)?, number(column)?));
    }
    Ok(Series { label, points })
}
