//! Shared tokenizer for the delimited dataset formats.

/// Splits a data line into fields. Lines containing a comma are split on
/// commas (empty fields kept); others on whitespace.
pub(crate) fn fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim();
        (!trimmed.is_empty() && !trimmed.starts_with('#')).then_some((i + 1, trimmed))
    })
}

pub(crate) fn read_file(path: &std::path::Path) -> crate::Result<String> {
    std::fs::read_to_string(path).map_err(|e| crate::Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}
