//! Recorded-response transport.
//!
//! A fixture file holds one object, or an array of objects, of the form
//! `{"request": {"path": ..., "params": {...}}, "status": 200, "body": ...}`.
//! Requests are matched on path plus exact parameters; failing that, the
//! fixture for the same path whose parameters are the largest subset of the
//! request's wins, so one recording can serve any evaluation timestamp.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{json, Value};

use super::{HttpReply, PromError, Transport, METADATA_PATH, NAMES_PATH, QUERY_PATH, RANGE_PATH};
use crate::error::ConfigError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRequest {
    pub path: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fixture {
    pub request: FixtureRequest,
    #[serde(default = "ok_status")]
    pub status: u16,
    /// Replayed verbatim; a JSON string is served as its contents.
    pub body: Box<RawValue>,
}

fn ok_status() -> u16 {
    200
}

type Key = (String, BTreeMap<String, String>);

#[derive(Clone, Debug, Default)]
pub struct FixtureSet {
    replies: BTreeMap<Key, HttpReply>,
}

pub fn success_body(data: Value) -> String {
    json!({"status": "success", "data": data}).to_string()
}

pub fn error_body(error_type: &str, message: &str) -> String {
    json!({"status": "error", "errorType": error_type, "error": message}).to_string()
}

impl FixtureSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }

    pub fn insert(&mut self, path: &str, params: &[(&str, &str)], status: u16, body: impl Into<String>) {
        let params = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        self.replies.insert(
            (path.to_string(), params),
            HttpReply {
                status,
                body: body.into(),
            },
        );
    }

    pub fn add(&mut self, f: Fixture) {
        let raw = f.body.get();
        let body = match serde_json::from_str::<String>(raw) {
            Ok(s) => s,
            Err(_) => raw.to_string(),
        };
        self.replies.insert(
            (f.request.path, f.request.params),
            HttpReply {
                status: f.status,
                body,
            },
        );
    }

    pub fn with_names<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        let names: Vec<&str> = names.iter().map(AsRef::as_ref).collect();
        self.insert(NAMES_PATH, &[], 200, success_body(json!(names)));
        self
    }

    pub fn with_metadata(mut self, name: &str, metric_type: &str, help: &str) -> Self {
        let data = json!({ name: [{"type": metric_type, "help": help, "unit": ""}] });
        self.insert(METADATA_PATH, &[("metric", name)], 200, success_body(data));
        self
    }

    /// Instant-query reply for `query` at any evaluation time.
    pub fn with_instant(mut self, query: &str, data: Value) -> Self {
        self.insert(QUERY_PATH, &[("query", query)], 200, success_body(data));
        self
    }

    /// Range-query reply for `query` over any window.
    pub fn with_range(mut self, query: &str, data: Value) -> Self {
        self.insert(RANGE_PATH, &[("query", query)], 200, success_body(data));
        self
    }

    pub fn with_error(mut self, path: &str, params: &[(&str, &str)], status: u16, error_type: &str, message: &str) -> Self {
        self.insert(path, params, status, error_body(error_type, message));
        self
    }

    /// Load every `*.json` file in `dir` (non-recursive, in name order).
    pub fn from_dir(dir: &Path) -> Result<Self, ConfigError> {
        let io = |e: std::io::Error| ConfigError::Parse {
            file: dir.display().to_string(),
            message: e.to_string(),
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut set = FixtureSet::new();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(io)?;
            set.load_str(&text).map_err(|e| match e {
                ConfigError::Parse { message, .. } => ConfigError::Parse {
                    file: p.display().to_string(),
                    message,
                },
                other => other,
            })?;
        }
        Ok(set)
    }

    /// Add the fixtures in one file's text.
    pub fn load_str(&mut self, text: &str) -> Result<(), ConfigError> {
        let parse_err = |e: serde_json::Error| ConfigError::Parse {
            file: "<fixture>".into(),
            message: e.to_string(),
        };
        if text.trim_start().starts_with('[') {
            let many: Vec<Fixture> = serde_json::from_str(text).map_err(parse_err)?;
            many.into_iter().for_each(|f| self.add(f));
        } else {
            self.add(serde_json::from_str(text).map_err(parse_err)?);
        }
        Ok(())
    }

    /// The recorded reply for a request, if any.
    pub fn respond(&self, path: &str, params: &[(String, String)]) -> Option<HttpReply> {
        let wanted: BTreeMap<String, String> = params.iter().cloned().collect();
        if let Some(r) = self.replies.get(&(path.to_string(), wanted.clone())) {
            return Some(r.clone());
        }
        self.replies
            .iter()
            .filter(|((p, ps), _)| p == path && ps.iter().all(|(k, v)| wanted.get(k) == Some(v)))
            .max_by_key(|((_, ps), _)| ps.len())
            .map(|(_, r)| r.clone())
    }
}

impl Transport for FixtureSet {
    fn get(&self, path: &str, params: &[(String, String)]) -> Result<HttpReply, PromError> {
        self.respond(path, params).ok_or_else(|| PromError::NoFixture {
            path: path.to_string(),
            params: params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("&"),
        })
    }
}
