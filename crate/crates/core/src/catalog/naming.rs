//! Metric-name conventions: tokenization and family/type inference.

use std::collections::{BTreeMap, BTreeSet};

use super::MetricType;

/// Lowercased tokens of a metric name, split on `_` and `:`.
pub fn name_tokens(name: &str) -> impl Iterator<Item = String> + '_ {
    name.split(['_', ':'])
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Infer a metric type from a name alone.
pub fn infer_type_from_name(name: &str) -> MetricType {
    if name.ends_with("_total") {
        MetricType::Counter
    } else if name.ends_with("_bucket") {
        MetricType::Histogram
    } else {
        MetricType::Gauge
    }
}

/// Collapse exposed series names into metric families.
///
/// `X_bucket` (with its `_sum`/`_count` siblings) becomes histogram `X`;
/// `X` alongside `X_sum` and `X_count` becomes summary `X`; anything else
/// stands alone, typed counter if it ends in `_total`, else gauge.
pub fn collapse_families<'a, I>(names: I) -> BTreeMap<String, MetricType>
where
    I: IntoIterator<Item = &'a str>,
{
    let all: BTreeSet<&str> = names.into_iter().collect();
    let mut consumed: BTreeSet<String> = BTreeSet::new();
    let mut out = BTreeMap::new();

    for name in &all {
        if let Some(base) = name.strip_suffix("_bucket") {
            if base.is_empty() {
                continue;
            }
            out.insert(base.to_string(), MetricType::Histogram);
            for s in ["_bucket", "_sum", "_count"] {
                consumed.insert(format!("{base}{s}"));
            }
        }
    }
    for name in &all {
        if out.contains_key(*name) || consumed.contains(*name) {
            continue;
        }
        let sum = format!("{name}_sum");
        let count = format!("{name}_count");
        if all.contains(sum.as_str()) && all.contains(count.as_str()) {
            out.insert(name.to_string(), MetricType::Summary);
            consumed.insert(sum);
            consumed.insert(count);
        }
    }
    for name in &all {
        if out.contains_key(*name) || consumed.contains(*name) {
            continue;
        }
        out.insert(name.to_string(), infer_type_from_name(name));
    }
    out
}

/// Series names a family of the given type exposes.
pub fn family_series(name: &str, ty: MetricType) -> Vec<String> {
    match ty {
        MetricType::Histogram => vec![
            format!("{name}_bucket"),
            format!("{name}_count"),
            format!("{name}_sum"),
        ],
        MetricType::Summary => vec![
            name.to_string(),
            format!("{name}_count"),
            format!("{name}_sum"),
        ],
        _ => vec![name.to_string()],
    }
}
