//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Everything runs in the page against the built-in catalog. There is no
//! Prometheus, so answers stop at the generated query.

use catalogql::catalog::synthetic::full_catalog;
use catalogql::config::EngineConfig;
use catalogql::generator::promql_issues;
use catalogql::service::{Engine, TimeInput};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

thread_local! {
    static ENGINE: Engine = {
        let cfg = EngineConfig::default();
        Engine::new(full_catalog(&cfg.keyword_rules), cfg, None)
    };
}

fn time_input(range: &str) -> TimeInput {
    if range.trim().is_empty() {
        TimeInput::Question
    } else {
        TimeInput::Expression(range.to_string())
    }
}

fn failure(e: impl ToString) -> Value {
    json!({"ok": false, "error": e.to_string()})
}

/// Translate a question. `now` is Unix seconds; 0 means the current time.
pub fn ask_value(question: &str, range: &str, now: i64) -> Value {
    ENGINE.with(|engine| {
        let now = if now > 0 { now } else { engine.now() };
        match engine.smart_discover(question, &time_input(range), false, now) {
            Ok(a) => json!({"ok": true, "answer": a}),
            Err(e) => failure(e),
        }
    })
}

pub fn resolve_time_value(expression: &str, now: i64) -> Value {
    ENGINE.with(|engine| {
        let now = if now > 0 { now } else { engine.now() };
        match engine.resolve(expression, &TimeInput::Question, now) {
            Ok(t) => json!({"ok": true, "time": t}),
            Err(e) => failure(e),
        }
    })
}

pub fn repair_value(query: &str, rate_syntax: &str) -> Value {
    let rate = if rate_syntax.trim().is_empty() { "[5m]" } else { rate_syntax };
    match catalogql::generator::repair(query, rate) {
        Ok((q, kinds)) => json!({
            "ok": true,
            "query": q,
            "repairs": kinds,
            "issues_before": promql_issues(query),
            "issues_after": promql_issues(&q),
        }),
        Err(e) => failure(e),
    }
}

/// JSON answer for a question, with an optional range override.
#[wasm_bindgen]
pub fn ask(question: &str, range: &str) -> String {
    ask_value(question, range, 0).to_string()
}

/// JSON breakdown of a time expression.
#[wasm_bindgen]
pub fn resolve_time(expression: &str) -> String {
    resolve_time_value(expression, 0).to_string()
}

/// JSON result of repairing a PromQL string.
#[wasm_bindgen]
pub fn repair(query: &str, rate_syntax: &str) -> String {
    repair_value(query, rate_syntax).to_string()
}

/// Number of metrics in the built-in catalog.
#[wasm_bindgen]
pub fn catalog_size() -> usize {
    ENGINE.with(|e| e.catalog().snapshot().len())
}
