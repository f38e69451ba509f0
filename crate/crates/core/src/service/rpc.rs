//! JSON-RPC 2.0 dispatch over the 12 registered tools.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Engine, TimeInput};
use crate::catalog::Category;
use crate::generator::{generate, promql_issues, repair};
use crate::intent::{detect_intent, IntentKind};
use crate::selector::{candidates, score_metric, select_from};

pub const TOOL_COUNT: usize = 12;

const PARSE_ERROR: i64 = -32700;
const INVALID_REQUEST: i64 = -32600;
const METHOD_NOT_FOUND: i64 = -32601;
const INVALID_PARAMS: i64 = -32602;
const TOOL_FAILED: i64 = -32000;

#[derive(Debug, Clone, PartialEq)]
pub enum ToolError {
    InvalidParams(String),
    Failed(String),
}

impl ToolError {
    fn code(&self) -> i64 {
        match self {
            ToolError::InvalidParams(_) => INVALID_PARAMS,
            ToolError::Failed(_) => TOOL_FAILED,
        }
    }

    fn message(&self) -> &str {
        match self {
            ToolError::InvalidParams(m) | ToolError::Failed(m) => m,
        }
    }
}

type Handler = fn(&Engine, Value) -> Result<Value, ToolError>;

#[derive(Clone)]
pub struct ToolDescriptor {
    pub name: &'static str,
    pub description: &'static str,
    pub input_schema: fn() -> Value,
    pub handler: Handler,
}

impl ToolDescriptor {
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "description": self.description,
            "inputSchema": (self.input_schema)(),
        })
    }
}

fn schema(props: Value, required: &[&str]) -> Value {
    json!({"type": "object", "properties": props, "required": required})
}

pub fn tool_descriptors() -> &'static [ToolDescriptor] {
    static TOOLS: [ToolDescriptor; TOOL_COUNT] = [
        ToolDescriptor {
            name: "search_metrics",
            description: "Rank catalog metrics against a free-text query.",
            input_schema: || schema(json!({
                "query": {"type": "string"},
                "category": {"type": "string"},
                "limit": {"type": "integer", "minimum": 1, "maximum": 200}
            }), &["query"]),
            handler: search_metrics,
        },
        ToolDescriptor {
            name: "get_metric_metadata",
            description: "Catalog record for a metric, or live metadata when it is not catalogued.",
            input_schema: || schema(json!({"name": {"type": "string"}}), &["name"]),
            handler: get_metric_metadata,
        },
        ToolDescriptor {
            name: "list_categories",
            description: "Categories with metric counts and hint keywords.",
            input_schema: || schema(json!({}), &[]),
            handler: list_categories,
        },
        ToolDescriptor {
            name: "catalog_stats",
            description: "Catalog size, priority split and startup readiness.",
            input_schema: || schema(json!({}), &[]),
            handler: catalog_stats,
        },
        ToolDescriptor {
            name: "detect_intent",
            description: "Classify a question's intent, measurements and domain terms.",
            input_schema: || schema(json!({"question": {"type": "string"}}), &["question"]),
            handler: detect_intent_tool,
        },
        ToolDescriptor {
            name: "resolve_time_range",
            description: "Resolve a time expression to a window and PromQL range.",
            input_schema: || schema(json!({
                "expression": {"type": "string"},
                "start": {"type": "integer"},
                "end": {"type": "integer"},
                "now": {"type": "integer"}
            }), &[]),
            handler: resolve_time_range,
        },
        ToolDescriptor {
            name: "select_metric",
            description: "Pick the best catalog metric for a question, with its score breakdown.",
            input_schema: || schema(json!({"question": {"type": "string"}}), &["question"]),
            handler: select_metric,
        },
        ToolDescriptor {
            name: "generate_promql",
            description: "Generate PromQL for a catalog metric, an intent and a time expression.",
            input_schema: || schema(json!({
                "metric": {"type": "string"},
                "intent": {"type": "string", "enum": IntentKind::ALL.map(IntentKind::as_str)},
                "question": {"type": "string"},
                "range": {"type": "string"},
                "now": {"type": "integer"}
            }), &["metric"]),
            handler: generate_promql,
        },
        ToolDescriptor {
            name: "validate_promql",
            description: "Check PromQL well-formedness and return the repaired form.",
            input_schema: || schema(json!({
                "query": {"type": "string"},
                "rate_syntax": {"type": "string"}
            }), &["query"]),
            handler: validate_promql,
        },
        ToolDescriptor {
            name: "execute_query",
            description: "Run an instant query.",
            input_schema: || schema(json!({"query": {"type": "string"}, "time": {"type": "integer"}}), &["query"]),
            handler: execute_query,
        },
        ToolDescriptor {
            name: "execute_range_query",
            description: "Run a range query.",
            input_schema: || schema(json!({
                "query": {"type": "string"},
                "start": {"type": "integer"},
                "end": {"type": "integer"},
                "step": {"type": "integer", "minimum": 1}
            }), &["query", "start", "end"]),
            handler: execute_range_query,
        },
        ToolDescriptor {
            name: "smart_discover",
            description: "Full pipeline: intent, time range, metric selection, PromQL, optional execution.",
            input_schema: || schema(json!({
                "question": {"type": "string"},
                "range": {"type": "string"},
                "start": {"type": "integer"},
                "end": {"type": "integer"},
                "execute": {"type": "boolean"},
                "now": {"type": "integer"}
            }), &["question"]),
            handler: smart_discover,
        },
    ];
    &TOOLS
}

fn params<T: DeserializeOwned>(v: Value) -> Result<T, ToolError> {
    let v = if v.is_null() { json!({}) } else { v };
    serde_json::from_value(v).map_err(|e| ToolError::InvalidParams(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, ToolError> {
    serde_json::to_value(v).map_err(|e| ToolError::Failed(e.to_string()))
}

fn non_empty(field: &str, s: &str) -> Result<(), ToolError> {
    if s.trim().is_empty() {
        Err(ToolError::InvalidParams(format!("`{field}` must not be empty")))
    } else {
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchParams {
    query: String,
    category: Option<String>,
    limit: Option<usize>,
}

fn search_metrics(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: SearchParams = params(p)?;
    non_empty("query", &p.query)?;
    let category = p
        .category
        .map(|c| c.parse::<Category>().map_err(|e| ToolError::InvalidParams(e.to_string())))
        .transpose()?;
    let limit = p.limit.unwrap_or(20).clamp(1, 200);
    let cfg = engine.config();
    let intent = detect_intent(&p.query, &cfg.lexicon).map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    let terms = super::fallback_terms(&p.query, cfg);
    let snapshot = engine.catalog().snapshot();
    let mut hits: Vec<_> = snapshot
        .entries()
        .filter(|e| category.is_none_or(|c| e.category == c))
        .filter_map(|e| {
            let s = score_metric(&p.query, e, &intent, &cfg.scoring);
            let lower = e.name.to_lowercase();
            let textual = terms
                .iter()
                .any(|t| lower.contains(t.as_str()) || e.keywords.iter().any(|k| k.contains(t.as_str())));
            (s.s_keyword > 0 || textual).then_some(s)
        })
        .collect();
    hits.sort_by(|a, b| a.rank_cmp(b));
    hits.truncate(limit);
    let results: Vec<Value> = hits
        .iter()
        .map(|s| {
            json!({
                "name": s.entry.name,
                "type": s.entry.metric_type,
                "category": s.entry.category,
                "priority": s.entry.priority,
                "help": s.entry.help,
                "score": s.s_total,
            })
        })
        .collect();
    Ok(json!({"results": results}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NameParams {
    name: String,
}

fn get_metric_metadata(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: NameParams = params(p)?;
    non_empty("name", &p.name)?;
    if let Some(e) = engine.catalog().snapshot().get(&p.name) {
        return Ok(json!({"source": "catalog", "metric": e}));
    }
    match engine.prom() {
        Some(prom) => {
            let m = prom.fetch_metadata(&p.name).map_err(|e| ToolError::Failed(e.to_string()))?;
            Ok(json!({"source": "prometheus", "metric": m}))
        }
        None => Err(ToolError::Failed(format!("metric `{}` is not in the catalog", p.name))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

fn list_categories(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let _: Empty = params(p)?;
    let snapshot = engine.catalog().snapshot();
    let list: Vec<Value> = Category::ALL
        .iter()
        .map(|c| {
            json!({
                "id": c,
                "count": snapshot.category(*c).len(),
                "keywords": snapshot.category_keywords().get(c).cloned().unwrap_or_default(),
            })
        })
        .collect();
    Ok(json!({"categories": list}))
}

fn catalog_stats(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let _: Empty = params(p)?;
    let snapshot = engine.catalog().snapshot();
    let stats = snapshot.stats();
    let r = engine.readiness();
    Ok(json!({
        "total": stats.total,
        "high": stats.high,
        "medium": stats.medium,
        "per_category": stats.per_category,
        "version": snapshot.source_version(),
        "loaded_at": snapshot.loaded_at(),
        "gpu_merged": r.gpu_merged(),
        "validated": r.validated(),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionParams {
    question: String,
}

fn detect_intent_tool(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: QuestionParams = params(p)?;
    let r = detect_intent(&p.question, &engine.config().lexicon)
        .map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    to_value(&r)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeParams {
    #[serde(default)]
    expression: String,
    start: Option<i64>,
    end: Option<i64>,
    now: Option<i64>,
}

fn time_input(start: Option<i64>, end: Option<i64>, expr: Option<String>) -> Result<TimeInput, ToolError> {
    match (start, end, expr) {
        (Some(start), Some(end), _) => Ok(TimeInput::Explicit { start, end }),
        (None, None, Some(e)) => Ok(TimeInput::Expression(e)),
        (None, None, None) => Ok(TimeInput::Question),
        _ => Err(ToolError::InvalidParams("`start` and `end` go together".into())),
    }
}

fn resolve_time_range(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: TimeParams = params(p)?;
    let now = p.now.unwrap_or_else(|| engine.now());
    let input = time_input(p.start, p.end, None)?;
    let r = engine
        .resolve(&p.expression, &input, now)
        .map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    to_value(&r)
}

fn select_metric(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: QuestionParams = params(p)?;
    let cfg = engine.config();
    let intent = detect_intent(&p.question, &cfg.lexicon).map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    let snapshot = engine.catalog().snapshot();
    let (hints, cands) = candidates(&p.question, &snapshot);
    let n = cands.len();
    let best = select_from(&p.question, &intent, cands, &cfg.scoring).map_err(|e| ToolError::Failed(e.to_string()))?;
    Ok(json!({"intent": intent, "hints": hints, "candidate_count": n, "selection": best}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateParams {
    metric: String,
    intent: Option<String>,
    #[serde(default)]
    question: String,
    range: Option<String>,
    now: Option<i64>,
}

fn generate_promql(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: GenerateParams = params(p)?;
    let cfg = engine.config();
    let snapshot = engine.catalog().snapshot();
    let entry = snapshot
        .get(&p.metric)
        .cloned()
        .ok_or_else(|| ToolError::Failed(format!("metric `{}` is not in the catalog", p.metric)))?;
    let seed = if p.question.trim().is_empty() { "what is" } else { p.question.as_str() };
    let mut intent = detect_intent(seed, &cfg.lexicon).map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    if let Some(name) = &p.intent {
        intent.intent = IntentKind::parse(name)
            .ok_or_else(|| ToolError::InvalidParams(format!("unknown intent `{name}`")))?;
    }
    let now = p.now.unwrap_or_else(|| engine.now());
    let input = p.range.map_or(TimeInput::Question, TimeInput::Expression);
    let time = engine
        .resolve(&p.question, &input, now)
        .map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    to_value(&generate(&entry, &intent, &time))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateParams {
    query: String,
    rate_syntax: Option<String>,
}

fn validate_promql(_engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: ValidateParams = params(p)?;
    let rate = p.rate_syntax.unwrap_or_else(|| "[5m]".into());
    let issues = promql_issues(&p.query);
    let repaired = match repair(&p.query, &rate) {
        Ok((q, kinds)) => json!({"query": q, "repairs": kinds, "issues": promql_issues(&q)}),
        Err(e) => json!({"error": e.reason}),
    };
    Ok(json!({"valid": issues.is_empty(), "issues": issues, "repaired": repaired}))
}

fn prom(engine: &Engine) -> Result<&dyn crate::prom::PromApi, ToolError> {
    engine
        .prom()
        .ok_or_else(|| ToolError::Failed("no Prometheus endpoint configured".into()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstantParams {
    query: String,
    time: Option<i64>,
}

fn execute_query(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: InstantParams = params(p)?;
    non_empty("query", &p.query)?;
    let at = p.time.unwrap_or_else(|| engine.now());
    let r = prom(engine)?.instant_query(&p.query, at).map_err(|e| ToolError::Failed(e.to_string()))?;
    to_value(&r)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeParams {
    query: String,
    start: i64,
    end: i64,
    step: Option<i64>,
}

fn execute_range_query(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: RangeParams = params(p)?;
    non_empty("query", &p.query)?;
    if p.start >= p.end {
        return Err(ToolError::InvalidParams(format!("start {} is not before end {}", p.start, p.end)));
    }
    let step = p.step.unwrap_or_else(|| crate::prom::step_for(p.start, p.end, 120));
    if step <= 0 {
        return Err(ToolError::InvalidParams("`step` must be positive".into()));
    }
    let r = prom(engine)?
        .range_query(&p.query, p.start, p.end, step)
        .map_err(|e| ToolError::Failed(e.to_string()))?;
    to_value(&r)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscoverParams {
    question: String,
    range: Option<String>,
    start: Option<i64>,
    end: Option<i64>,
    #[serde(default)]
    execute: bool,
    now: Option<i64>,
}

fn smart_discover(engine: &Engine, p: Value) -> Result<Value, ToolError> {
    let p: DiscoverParams = params(p)?;
    non_empty("question", &p.question)?;
    let input = time_input(p.start, p.end, p.range)?;
    let now = p.now.unwrap_or_else(|| engine.now());
    let answer = engine
        .smart_discover(&p.question, &input, p.execute, now)
        .map_err(|e| match e {
            super::PipelineError::Intent(e) | super::PipelineError::Time(e) => ToolError::InvalidParams(e.to_string()),
            other => ToolError::Failed(other.to_string()),
        })?;
    let mut v = to_value(&answer)?;
    // Flat copy of the query string for clients that only want PromQL.
    v["promql"] = json!(answer.query.promql);
    Ok(v)
}

fn find_tool(name: &str) -> Option<&'static ToolDescriptor> {
    tool_descriptors().iter().find(|t| t.name == name)
}

fn error(id: Value, code: i64, message: &str) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message}})
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CallParams {
    name: String,
    #[serde(default)]
    arguments: Value,
}

fn dispatch(engine: &Engine, method: &str, params: Value) -> Result<Value, (i64, String)> {
    let fail = |e: ToolError| (e.code(), e.message().to_string());
    match method {
        "tools/list" => Ok(json!({"tools": tool_descriptors().iter().map(|t| t.to_json()).collect::<Vec<_>>()})),
        "tools/call" => {
            let call: CallParams = self::params(params).map_err(fail)?;
            let tool = find_tool(&call.name)
                .ok_or_else(|| (INVALID_PARAMS, format!("unknown tool `{}`", call.name)))?;
            Ok(match (tool.handler)(engine, call.arguments) {
                Ok(v) => json!({
                    "content": [{"type": "text", "text": v.to_string()}],
                    "structuredContent": v,
                    "isError": false,
                }),
                Err(ToolError::InvalidParams(m)) => return Err((INVALID_PARAMS, m)),
                Err(ToolError::Failed(m)) => json!({
                    "content": [{"type": "text", "text": m}],
                    "isError": true,
                }),
            })
        }
        name => match find_tool(name) {
            Some(tool) => (tool.handler)(engine, params).map_err(fail),
            None => Err((METHOD_NOT_FOUND, format!("method `{name}` not found"))),
        },
    }
}

fn handle_one(engine: &Engine, req: Value) -> Option<Value> {
    let Value::Object(obj) = req else {
        return Some(error(Value::Null, INVALID_REQUEST, "request must be an object"));
    };
    let id = obj.get("id").cloned();
    let id_ok = matches!(id, None | Some(Value::Null | Value::Number(_) | Value::String(_)));
    let reply_id = if id_ok { id.clone().unwrap_or(Value::Null) } else { Value::Null };
    if obj.get("jsonrpc") != Some(&json!("2.0")) || !id_ok {
        return Some(error(reply_id, INVALID_REQUEST, "invalid JSON-RPC 2.0 request"));
    }
    let Some(Value::String(method)) = obj.get("method") else {
        return Some(error(reply_id, INVALID_REQUEST, "missing method"));
    };
    let params = obj.get("params").cloned().unwrap_or(Value::Null);
    if !matches!(params, Value::Null | Value::Object(_)) {
        id.as_ref()?;
        return Some(error(reply_id, INVALID_PARAMS, "params must be an object"));
    }
    let outcome = dispatch(engine, method, params);
    // Notifications get no reply.
    id.as_ref()?;
    Some(match outcome {
        Ok(result) => json!({"jsonrpc": "2.0", "id": reply_id, "result": result}),
        Err((code, message)) => error(reply_id, code, &message),
    })
}

/// Handle a decoded message (single request or batch).
pub fn handle_value(engine: &Engine, msg: Value) -> Option<Value> {
    match msg {
        Value::Array(items) if items.is_empty() => Some(error(Value::Null, INVALID_REQUEST, "empty batch")),
        Value::Array(items) => {
            let replies: Vec<Value> = items.into_iter().filter_map(|r| handle_one(engine, r)).collect();
            (!replies.is_empty()).then_some(Value::Array(replies))
        }
        other => handle_one(engine, other),
    }
}

/// Handle a raw JSON-RPC message. Returns `None` when nothing should be
/// sent back (notifications).
pub fn handle_message(engine: &Engine, text: &str) -> Option<String> {
    let reply = match serde_json::from_str::<Value>(text) {
        Ok(v) => handle_value(engine, v),
        Err(_) => Some(error(Value::Null, PARSE_ERROR, "Parse error")),
    };
    reply.map(|v| v.to_string())
}
