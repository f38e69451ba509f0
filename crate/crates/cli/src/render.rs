//! Plain-text rendering for the terminal.

use std::fmt::Write;

use catalogql::prom::{QueryResult, ResultType, Series};
use catalogql::service::{AnswerPath, PipelineAnswer};

fn labels(s: &Series) -> String {
    let name = s.labels.get("__name__").cloned().unwrap_or_default();
    let rest: Vec<String> = s
        .labels
        .iter()
        .filter(|(k, _)| *k != "__name__")
        .map(|(k, v)| format!("{k}=\"{v}\""))
        .collect();
    match (name.is_empty(), rest.is_empty()) {
        (true, true) => "{}".into(),
        (_, true) => name,
        _ => format!("{name}{{{}}}", rest.join(", ")),
    }
}

fn utc(ts: f64) -> String {
    chrono::DateTime::from_timestamp(ts.floor() as i64, 0)
        .map(|d| d.format("%Y-%m-%d %H:%M:%S").to_string())
        .unwrap_or_else(|| format!("{ts}"))
}

/// One row per series: labels, latest value, and for matrices the sample
/// count and min/max.
pub fn result_table(r: &QueryResult) -> String {
    let mut rows: Vec<[String; 4]> = Vec::new();
    for s in &r.series {
        let Some(last) = s.samples.last() else { continue };
        let values: Vec<f64> = s.samples.iter().filter_map(|x| x.as_f64()).collect();
        let span = if r.result_type == ResultType::Matrix && !values.is_empty() {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            format!("{} pts, {lo}..{hi}", s.samples.len())
        } else {
            String::new()
        };
        rows.push([labels(s), last.value.clone(), utc(last.timestamp), span]);
    }
    if rows.is_empty() {
        return "(no data)\n".into();
    }
    let head = ["series", "value", "at (UTC)", "range"];
    let mut width = head.map(str::len);
    for row in &rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: [&str; 4]| {
        let parts: Vec<String> = cells.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(head);
    line(width.map(|w| "-".repeat(w)).each_ref().map(String::as_str));
    for row in &rows {
        line(row.each_ref().map(String::as_str));
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn answer_text(a: &PipelineAnswer) -> String {
    let s = &a.selection;
    let e = &s.entry;
    let mut out = String::new();
    let _ = writeln!(out, "PromQL:   {}", a.query.promql);
    let _ = writeln!(
        out,
        "Metric:   {} ({}, {}, {})",
        e.name, e.metric_type, e.category, e.priority
    );
    let _ = writeln!(
        out,
        "Score:    {} = keyword {} + type {} + specificity {} + priority {}",
        s.s_total, s.s_keyword, s.s_type, s.s_specificity, s.s_priority
    );
    if !s.matched.is_empty() {
        let hits: Vec<String> = s.matched.iter().map(|h| format!("{} +{}", h.pattern, h.weight)).collect();
        let _ = writeln!(out, "Matched:  {}", hits.join(", "));
    }
    let _ = writeln!(
        out,
        "Intent:   {}    Window: {} {} ({})",
        a.intent.intent, a.time.duration_text, a.time.rate_syntax, a.time.strategy
    );
    let source = match a.path {
        AnswerPath::Catalog => "catalog",
        AnswerPath::ApiFallback => "live metric list",
    };
    let _ = writeln!(out, "Source:   {source}, {} candidates", a.candidate_count);
    if !a.query.repairs.is_empty() {
        let kinds: Vec<String> = a.query.repairs.iter().map(|k| format!("{k:?}")).collect();
        let _ = writeln!(out, "Repairs:  {}", kinds.join(", "));
    }
    let _ = writeln!(out, "\n{}", a.explanation);
    if let Some(r) = &a.execution {
        let _ = write!(out, "\n{}", result_table(r));
    }
    if let Some(err) = &a.execution_error {
        let _ = writeln!(out, "\nexecution failed: {err}");
    }
    out
}
