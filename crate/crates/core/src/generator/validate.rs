//! Lightweight PromQL well-formedness checks. Not a parser: it checks the
//! properties the generator and repair pass are responsible for.

use std::sync::LazyLock;

use regex::Regex;

use super::repair::RANGE_CALLS;
use super::scan::{ident_before, layout, Layout, NONE};

const RANGE_FUNCTIONS: &[&str] = &[
    "rate",
    "irate",
    "increase",
    "delta",
    "idelta",
    "deriv",
    "predict_linear",
    "holt_winters",
    "double_exponential_smoothing",
    "resets",
    "changes",
    "avg_over_time",
    "min_over_time",
    "max_over_time",
    "sum_over_time",
    "count_over_time",
    "quantile_over_time",
    "stddev_over_time",
    "stdvar_over_time",
    "last_over_time",
    "present_over_time",
    "absent_over_time",
    "mad_over_time",
];

const QUANTILE_FUNCTIONS: &[&str] = &["histogram_quantile", "quantile", "quantile_over_time"];

static RANGE_BODY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*(?:\d+(?:ms|[smhdwy]))+\s*(?::\s*(?:(?:\d+(?:ms|[smhdwy]))+)?\s*)?$").unwrap()
});

fn call_name<'a>(q: &'a str, lay: &Layout, open: usize) -> Option<&'a str> {
    if open == NONE || q.as_bytes()[open] != b'(' {
        return None;
    }
    let _ = lay;
    ident_before(q, open).map(|(s, e)| &q[s..e])
}

/// Problems found in `query`; empty when it is well formed.
pub fn promql_issues(query: &str) -> Vec<String> {
    let mut issues = Vec::new();
    if query.trim().is_empty() {
        issues.push("empty query".to_string());
        return issues;
    }
    let Some(lay) = layout(query) else {
        issues.push("unbalanced delimiters or unterminated string".to_string());
        return issues;
    };
    let b = query.as_bytes();
    if query.trim_end().ends_with(',') && !lay.mask[query.trim_end().len() - 1] {
        issues.push("trailing comma at end of query".to_string());
    }
    for i in 0..b.len() {
        if lay.mask[i] {
            continue;
        }
        match b[i] {
            b'}' | b')' => {
                let before = query[..i].trim_end();
                if before.ends_with(',') {
                    let what = if b[i] == b'}' { "label selector" } else { "argument list" };
                    issues.push(format!("trailing comma in {what} at byte {i}"));
                }
            }
            b'[' => {
                let close = lay.partner[i];
                let body = &query[i + 1..close];
                if !RANGE_BODY.is_match(body) {
                    issues.push(format!("malformed range `[{body}]`"));
                }
                match call_name(query, &lay, lay.parent[i]) {
                    Some(f) if RANGE_FUNCTIONS.contains(&f) => {}
                    _ => issues.push(format!(
                        "range `[{body}]` outside a function that takes a range vector"
                    )),
                }
                let operand = query[..i].trim_end();
                if operand.ends_with(')') && !body.contains(':') {
                    issues.push(format!("range `[{body}]` applied to an expression, not a selector"));
                }
            }
            b'(' => {
                let Some(name) = call_name(query, &lay, i) else {
                    continue;
                };
                let close = lay.partner[i];
                if RANGE_CALLS.contains(&name) {
                    let direct = (i + 1..close).any(|j| b[j] == b'[' && !lay.mask[j] && lay.parent[j] == i);
                    if !direct {
                        issues.push(format!("{name}() without a range"));
                    }
                }
                if QUANTILE_FUNCTIONS.contains(&name) {
                    let first_comma = (i + 1..close).find(|&j| b[j] == b',' && lay.parent[j] == i);
                    if let Some(c) = first_comma {
                        if let Ok(v) = query[i + 1..c].trim().parse::<f64>() {
                            if !(v > 0.0 && v < 1.0) {
                                issues.push(format!("{name}() quantile {v} outside (0, 1)"));
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    issues
}

pub fn is_valid_promql(query: &str) -> bool {
    promql_issues(query).is_empty()
}
