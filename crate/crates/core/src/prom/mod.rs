//! Prometheus HTTP API v1 client surface.
//!
//! [`PromClient`] builds requests and decodes responses; the bytes move
//! through a [`Transport`]. The fixture transport replays recorded
//! responses, so offline runs exercise exactly the same decoding as live
//! ones.

#[doc(hidden)]
pub mod conformance;
mod fixture;
mod wire;

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::InputError;

pub use fixture::{Fixture, FixtureRequest, FixtureSet};
pub use wire::{decode_metadata, decode_names, decode_query};

pub const NAMES_PATH: &str = "/api/v1/label/__name__/values";
pub const METADATA_PATH: &str = "/api/v1/metadata";
pub const QUERY_PATH: &str = "/api/v1/query";
pub const RANGE_PATH: &str = "/api/v1/query_range";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out after {0} ms")]
    Timeout(u64),
    /// Prometheus answered with an error; `message` is its text verbatim.
    #[error("prometheus {error_type} error (HTTP {status}): {message}")]
    Api {
        status: u16,
        error_type: String,
        message: String,
    },
    #[error("undecodable response: {0}")]
    Decode(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("no fixture for {path} {params}")]
    NoFixture { path: String, params: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetadataType {
    Counter,
    Gauge,
    Histogram,
    Summary,
    Unknown,
}

impl MetadataType {
    pub fn parse(s: &str) -> Self {
        match s {
            "counter" => MetadataType::Counter,
            "gauge" => MetadataType::Gauge,
            "histogram" => MetadataType::Histogram,
            "summary" => MetadataType::Summary,
            _ => MetadataType::Unknown,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricMetadata {
    pub name: String,
    #[serde(rename = "type")]
    pub metric_type: MetadataType,
    pub help: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResultType {
    Vector,
    Matrix,
    Scalar,
}

/// One sample. The value keeps Prometheus's string form (`"NaN"`, `"+Inf"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub timestamp: f64,
    pub value: String,
}

impl Sample {
    pub fn as_f64(&self) -> Option<f64> {
        self.value.parse().ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub labels: BTreeMap<String, String>,
    /// Ascending by timestamp.
    pub samples: Vec<Sample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub result_type: ResultType,
    pub series: Vec<Series>,
    pub warnings: Vec<String>,
}

/// The four API operations the pipeline needs.
pub trait PromApi: Send + Sync {
    fn list_metric_names(&self) -> Result<Vec<String>, PromError>;
    fn fetch_metadata(&self, name: &str) -> Result<MetricMetadata, PromError>;
    fn instant_query(&self, promql: &str, at: i64) -> Result<QueryResult, PromError>;
    fn range_query(&self, promql: &str, start: i64, end: i64, step: i64)
        -> Result<QueryResult, PromError>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// Performs a GET of `path` with query `params` against the API root.
pub trait Transport: Send + Sync {
    fn get(&self, path: &str, params: &[(String, String)]) -> Result<HttpReply, PromError>;
}

/// API client over any transport, counting calls per endpoint.
#[derive(Debug)]
pub struct PromClient<T> {
    transport: T,
    calls: Mutex<BTreeMap<&'static str, usize>>,
}

pub type FixtureClient = PromClient<FixtureSet>;

impl<T: Transport> PromClient<T> {
    pub fn new(transport: T) -> Self {
        PromClient {
            transport,
            calls: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    /// Requests issued to `endpoint` so far.
    pub fn calls(&self, endpoint: &str) -> usize {
        self.calls
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(endpoint)
            .copied()
            .unwrap_or(0)
    }

    fn get(&self, path: &'static str, params: Vec<(String, String)>) -> Result<HttpReply, PromError> {
        *self
            .calls
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .entry(path)
            .or_default() += 1;
        self.transport.get(path, &params)
    }
}

impl FixtureClient {
    pub fn from_set(set: FixtureSet) -> Self {
        PromClient::new(set)
    }
}

fn param(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

impl<T: Transport> PromApi for PromClient<T> {
    fn list_metric_names(&self) -> Result<Vec<String>, PromError> {
        decode_names(&self.get(NAMES_PATH, vec![])?)
    }

    fn fetch_metadata(&self, name: &str) -> Result<MetricMetadata, PromError> {
        let reply = self.get(METADATA_PATH, vec![param("metric", name)])?;
        decode_metadata(name, &reply)
    }

    fn instant_query(&self, promql: &str, at: i64) -> Result<QueryResult, PromError> {
        if promql.trim().is_empty() {
            return Err(InputError::EmptyQuery.into());
        }
        let reply = self.get(QUERY_PATH, vec![param("query", promql), param("time", at)])?;
        decode_query(&reply)
    }

    fn range_query(&self, promql: &str, start: i64, end: i64, step: i64) -> Result<QueryResult, PromError> {
        if start >= end {
            return Err(InputError::InvertedRange { start, end }.into());
        }
        if step <= 0 {
            return Err(InputError::NonPositiveDuration(step).into());
        }
        let reply = self.get(
            RANGE_PATH,
            vec![
                param("query", promql),
                param("start", start),
                param("end", end),
                param("step", step),
            ],
        )?;
        decode_query(&reply)
    }
}

/// Step that keeps a range query to roughly `points` samples, at least 1 s.
pub fn step_for(start: i64, end: i64, points: i64) -> i64 {
    ((end - start) / points.max(1)).max(1)
}
