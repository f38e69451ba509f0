use thiserror::Error;

/// Errors raised while loading or validating catalog and config data.
#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed catalog JSON at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("duplicate metric `{0}`")]
    DuplicateMetric(String),
    #[error("unknown category id `{0}`")]
    UnknownCategory(String),
    #[error("metric `{name}`: unknown {field} `{value}`")]
    UnknownValue {
        name: String,
        field: &'static str,
        value: String,
    },
    #[error("invalid metric name `{0}`")]
    InvalidName(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{file}: {message}")]
    Parse { file: String, message: String },
    #[error("{file}: invalid regex `{pattern}`: {source}")]
    Regex {
        file: String,
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("query is empty")]
    EmptyQuery,
    #[error("explicit range start {start} is not before end {end}")]
    InvertedRange { start: i64, end: i64 },
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(i64),
}

/// Selection found no candidate in the catalog.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no metric found for question")]
pub struct NoMetricFound;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("irreparable query `{original}`: {reason}")]
pub struct RepairError {
    pub original: String,
    pub reason: String,
}

/// Compute a byte offset from a serde_json error's 1-based line/column.
pub(crate) fn byte_offset(input: &str, err: &serde_json::Error) -> usize {
    let line = err.line();
    if line == 0 {
        return 0;
    }
    let line_start: usize = input
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + err.column().saturating_sub(1)).min(input.len())
}
