//! Decoding of the `{"status": ..., "data": ...}` response envelope.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use super::{HttpReply, MetadataType, MetricMetadata, PromError, QueryResult, ResultType, Sample, Series};

#[derive(Deserialize)]
struct Envelope {
    status: String,
    #[serde(default)]
    data: Value,
    #[serde(default, rename = "errorType")]
    error_type: String,
    #[serde(default)]
    error: String,
    #[serde(default)]
    warnings: Vec<String>,
}

fn open(reply: &HttpReply) -> Result<Envelope, PromError> {
    let env: Result<Envelope, _> = serde_json::from_str(&reply.body);
    match env {
        Ok(e) if e.status == "success" && (200..300).contains(&reply.status) => Ok(e),
        Ok(e) => Err(PromError::Api {
            status: reply.status,
            error_type: if e.error_type.is_empty() { "unknown".into() } else { e.error_type },
            message: e.error,
        }),
        Err(_) if !(200..300).contains(&reply.status) => Err(PromError::Api {
            status: reply.status,
            error_type: "http".into(),
            message: reply.body.chars().take(512).collect(),
        }),
        Err(e) => Err(PromError::Decode(e.to_string())),
    }
}

fn bad(what: &str) -> PromError {
    PromError::Decode(format!("unexpected {what}"))
}

pub fn decode_names(reply: &HttpReply) -> Result<Vec<String>, PromError> {
    let env = open(reply)?;
    serde_json::from_value(env.data).map_err(|_| bad("label values payload"))
}

#[derive(Deserialize)]
struct RawMeta {
    #[serde(rename = "type")]
    metric_type: String,
    #[serde(default)]
    help: String,
}

/// An absent metric decodes as type `unknown` with empty help.
pub fn decode_metadata(name: &str, reply: &HttpReply) -> Result<MetricMetadata, PromError> {
    let env = open(reply)?;
    let mut map: BTreeMap<String, Vec<RawMeta>> =
        serde_json::from_value(env.data).map_err(|_| bad("metadata payload"))?;
    let first = map.remove(name).and_then(|v| v.into_iter().next());
    Ok(match first {
        Some(m) => MetricMetadata {
            name: name.to_string(),
            metric_type: MetadataType::parse(&m.metric_type),
            help: m.help,
        },
        None => MetricMetadata {
            name: name.to_string(),
            metric_type: MetadataType::Unknown,
            help: String::new(),
        },
    })
}

fn sample(v: &Value) -> Result<Sample, PromError> {
    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("sample shape"))?;
    let timestamp = pair[0].as_f64().ok_or_else(|| bad("sample timestamp"))?;
    let value = pair[1].as_str().ok_or_else(|| bad("sample value"))?.to_string();
    Ok(Sample { timestamp, value })
}

#[derive(Deserialize)]
struct RawSeries {
    #[serde(default)]
    metric: BTreeMap<String, String>,
    value: Option<Value>,
    values: Option<Vec<Value>>,
}

pub fn decode_query(reply: &HttpReply) -> Result<QueryResult, PromError> {
    let env = open(reply)?;
    let result_type = env.data.get("resultType").and_then(Value::as_str).unwrap_or_default();
    let result = env.data.get("result").cloned().unwrap_or(Value::Null);
    let (result_type, series) = match result_type {
        "scalar" => (
            ResultType::Scalar,
            vec![Series {
                labels: BTreeMap::new(),
                samples: vec![sample(&result)?],
            }],
        ),
        "vector" | "matrix" => {
            let raw: Vec<RawSeries> = serde_json::from_value(result).map_err(|_| bad("series list"))?;
            let mut series = Vec::with_capacity(raw.len());
            for r in raw {
                let mut samples = match (r.value, r.values) {
                    (Some(v), _) => vec![sample(&v)?],
                    (None, Some(vs)) => vs.iter().map(sample).collect::<Result<_, _>>()?,
                    (None, None) => return Err(bad("series without samples")),
                };
                samples.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
                series.push(Series {
                    labels: r.metric,
                    samples,
                });
            }
            let ty = if result_type == "vector" { ResultType::Vector } else { ResultType::Matrix };
            (ty, series)
        }
        other => return Err(bad(&format!("result type `{other}`"))),
    };
    Ok(QueryResult {
        result_type,
        series,
        warnings: env.warnings,
    })
}
