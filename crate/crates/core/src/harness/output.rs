//! CSV rendering and atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::sweep::Aggregate;
use crate::error::{Error, Result};
use crate::regret::RegretTrace;

pub const TRACE_HEADER: &str = "slot,learner_cumulative,comparator_cumulative,regret,normalized_regret,regret_per_slot";
pub const AGGREGATE_HEADER: &str = "slot,mean_normalized_regret,std_normalized_regret,runs";

/// One row per slot. `normalized_regret` divides by the horizon `T`,
/// `regret_per_slot` by the current slot `t`.
pub fn trace_csv(trace: &RegretTrace) -> String {
    let horizon = trace.horizon() as f64;
    let mut out = String::with_capacity(64 * trace.horizon());
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for t in 1..=trace.horizon() {
        let regret = trace.regret_at(t);
        let _ = writeln!(
            out,
            "{t},{},{},{regret},{},{}",
            trace.learner_cumulative()[t - 1],
            trace.comparator_cumulative()[t - 1],
            regret / horizon,
            regret / t as f64
        );
    }
    out
}

pub fn aggregate_csv(aggregate: &Aggregate) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    for (i, (m, s)) in aggregate.mean_normalized.iter().zip(&aggregate.std_normalized).enumerate() {
        let _ = writeln!(out, "{},{m},{s},{}", i + 1, aggregate.runs);
    }
    out
}

/// Writes via a temporary file in the same directory, then renames, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let file_name = path.file_name().ok_or_else(|| Error::Io {
        path: path.display().to_string(),
        reason: "not a file path".into(),
    })?;
    let tmp = dir.join(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Slugs a run name for use in file names.
pub fn file_stem(name: &str) -> String {
    let slug: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if slug.is_empty() {
        "run".into()
    } else {
        slug
    }
}
