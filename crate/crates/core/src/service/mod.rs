//! The end-to-end pipeline ("smart discovery") and its tool surface.

mod rpc;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::naming::collapse_families;
use crate::catalog::{generate_keywords, Catalog, CatalogHandle, Category, MetricEntry, MetricType};
use crate::clock::{unix_now, Stopwatch};
use crate::config::EngineConfig;
use crate::error::{InputError, NoMetricFound};
use crate::generator::{generate, GeneratedQuery};
use crate::intent::{detect_intent, IntentKind, IntentResult};
use crate::prom::{step_for, MetadataType, PromApi, PromError, QueryResult};
use crate::selector::{candidates, select_from, ScoredMetric};
use crate::temporal::{resolve_time, TimeRangeInfo};
use crate::text::normalize;
use crate::validation::{build_prefix_map_excluding, categorize_new_metric};

pub use rpc::{handle_message, handle_value, tool_descriptors, ToolDescriptor, ToolError, TOOL_COUNT};

/// Most live families the API fallback will fetch metadata for.
pub const FALLBACK_CAP: usize = 200;
/// Target sample count for range execution.
const RANGE_POINTS: i64 = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerPath {
    Catalog,
    ApiFallback,
}

impl fmt::Display for AnswerPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerPath::Catalog => "catalog",
            AnswerPath::ApiFallback => "api_fallback",
        })
    }
}

/// Wall time per stage, in milliseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub intent_ms: f64,
    pub temporal_ms: f64,
    pub selection_ms: f64,
    pub generation_ms: f64,
    pub execution_ms: Option<f64>,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineAnswer {
    pub question: String,
    pub intent: IntentResult,
    pub time: TimeRangeInfo,
    pub hints: Vec<Category>,
    pub candidate_count: usize,
    pub selection: ScoredMetric,
    pub query: GeneratedQuery,
    pub explanation: String,
    pub execution: Option<QueryResult>,
    pub execution_error: Option<String>,
    pub path: AnswerPath,
    pub timings: StageTimings,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("intent detection: {0}")]
    Intent(InputError),
    #[error("time resolution: {0}")]
    Time(InputError),
    #[error("metric selection: {0}")]
    Selection(String),
    #[error("api fallback: {0}")]
    Fallback(PromError),
}

/// Where the time window comes from.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum TimeInput {
    /// Resolve from the question text.
    #[default]
    Question,
    /// Caller-supplied Unix timestamps.
    Explicit { start: i64, end: i64 },
    /// A separate time expression such as `6h` or `last tuesday`.
    Expression(String),
}

#[derive(Debug, Default)]
pub struct Readiness {
    catalog: AtomicBool,
    gpu: AtomicBool,
    validated: AtomicBool,
}

impl Readiness {
    pub fn catalog_loaded(&self) -> bool {
        self.catalog.load(Ordering::Acquire)
    }

    pub fn gpu_merged(&self) -> bool {
        self.gpu.load(Ordering::Acquire)
    }

    pub fn validated(&self) -> bool {
        self.validated.load(Ordering::Acquire)
    }

    pub fn set_catalog_loaded(&self) {
        self.catalog.store(true, Ordering::Release);
    }

    pub fn set_gpu_merged(&self) {
        self.gpu.store(true, Ordering::Release);
    }

    pub fn set_validated(&self) {
        self.validated.store(true, Ordering::Release);
    }
}

type Clock = Arc<dyn Fn() -> i64 + Send + Sync>;

/// Shared pipeline state. Cloning is cheap and clones share the catalog.
#[derive(Clone)]
pub struct Engine {
    catalog: Arc<CatalogHandle>,
    config: Arc<EngineConfig>,
    prom: Option<Arc<dyn PromApi>>,
    readiness: Arc<Readiness>,
    clock: Clock,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("metrics", &self.catalog.snapshot().len())
            .field("prometheus", &self.prom.is_some())
            .field("readiness", &self.readiness)
            .finish()
    }
}

impl Engine {
    pub fn new(catalog: Catalog, config: EngineConfig, prom: Option<Arc<dyn PromApi>>) -> Self {
        let readiness = Readiness::default();
        readiness.set_catalog_loaded();
        Engine {
            catalog: Arc::new(CatalogHandle::new(catalog)),
            config: Arc::new(config),
            prom,
            readiness: Arc::new(readiness),
            clock: Arc::new(unix_now),
        }
    }

    /// Replace the wall clock, e.g. with a fixed instant.
    pub fn with_clock(mut self, clock: impl Fn() -> i64 + Send + Sync + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    pub fn now(&self) -> i64 {
        (self.clock)()
    }

    pub fn catalog(&self) -> &CatalogHandle {
        &self.catalog
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn prom(&self) -> Option<&dyn PromApi> {
        self.prom.as_deref()
    }

    pub fn readiness(&self) -> &Readiness {
        &self.readiness
    }

    pub fn resolve(&self, question: &str, time: &TimeInput, now: i64) -> Result<TimeRangeInfo, InputError> {
        let cfg = &self.config.temporal;
        match time {
            TimeInput::Question => resolve_time(question, None, now, cfg),
            TimeInput::Explicit { start, end } => resolve_time(question, Some((*start, *end)), now, cfg),
            TimeInput::Expression(expr) => resolve_time(expr, None, now, cfg),
        }
    }

    /// Run intent detection, time resolution, selection and generation, and
    /// optionally execute the query.
    pub fn smart_discover(
        &self,
        question: &str,
        time: &TimeInput,
        execute: bool,
        now: i64,
    ) -> Result<PipelineAnswer, PipelineError> {
        let total = Stopwatch::start();
        let mut timings = StageTimings::default();
        let ms = |w: Stopwatch| w.elapsed().as_secs_f64() * 1e3;

        let w = Stopwatch::start();
        let intent = detect_intent(question, &self.config.lexicon).map_err(PipelineError::Intent)?;
        timings.intent_ms = ms(w);

        let w = Stopwatch::start();
        let range = self.resolve(question, time, now).map_err(PipelineError::Time)?;
        timings.temporal_ms = ms(w);

        let w = Stopwatch::start();
        let snapshot = self.catalog.snapshot();
        let (hints, cands) = candidates(question, &snapshot);
        let mut candidate_count = cands.len();
        let (selection, path) = match select_from(question, &intent, cands, &self.config.scoring) {
            Ok(s) => (s, AnswerPath::Catalog),
            Err(NoMetricFound) => {
                let (s, n) = self.api_fallback(question, &intent, &snapshot)?;
                candidate_count = n;
                (s, AnswerPath::ApiFallback)
            }
        };
        timings.selection_ms = ms(w);

        let w = Stopwatch::start();
        let query = generate(&selection.entry, &intent, &range);
        timings.generation_ms = ms(w);

        let (mut execution, mut execution_error) = (None, None);
        if execute {
            let w = Stopwatch::start();
            match self.execute(&query.promql, intent.intent, &range) {
                Ok(r) => execution = Some(r),
                Err(e) => execution_error = Some(e.to_string()),
            }
            timings.execution_ms = Some(ms(w));
        }
        timings.total_ms = ms(total);

        Ok(PipelineAnswer {
            question: question.to_string(),
            explanation: explain(&selection.entry, &intent, &range, path),
            intent,
            time: range,
            hints: hints.into_iter().collect(),
            candidate_count,
            selection,
            query,
            execution,
            execution_error,
            path,
            timings,
        })
    }

    fn execute(&self, promql: &str, intent: IntentKind, range: &TimeRangeInfo) -> Result<QueryResult, PromError> {
        let prom = self
            .prom
            .as_deref()
            .ok_or_else(|| PromError::Transport("no Prometheus endpoint configured".into()))?;
        if intent == IntentKind::CurrentValue {
            prom.instant_query(promql, range.end)
        } else {
            prom.range_query(promql, range.start, range.end, step_for(range.start, range.end, RANGE_POINTS))
        }
    }

    /// Live-API selection: families whose name contains a question word,
    /// typed and described from per-metric metadata, then scored as usual.
    fn api_fallback(
        &self,
        question: &str,
        intent: &IntentResult,
        catalog: &Catalog,
    ) -> Result<(ScoredMetric, usize), PipelineError> {
        let prom = self
            .prom
            .as_deref()
            .ok_or_else(|| PipelineError::Selection("no candidate metrics and no Prometheus endpoint".into()))?;
        let names = prom.list_metric_names().map_err(PipelineError::Fallback)?;
        let words = fallback_terms(question, &self.config);
        let families = collapse_families(names.iter().map(String::as_str));
        let picked: Vec<(String, MetricType)> = families
            .into_iter()
            .filter(|(name, _)| {
                let lower = name.to_lowercase();
                words.iter().any(|w| lower.contains(w.as_str()))
            })
            .take(FALLBACK_CAP)
            .collect();

        let prefix_map = build_prefix_map_excluding(catalog, Some(&self.config.prefixes));
        let mut entries = Vec::with_capacity(picked.len());
        for (name, inferred) in picked {
            let (metric_type, help) = match prom.fetch_metadata(&name) {
                Ok(m) => (metadata_type(m.metric_type).unwrap_or(inferred), m.help),
                Err(e) => {
                    log::warn!("metadata for {name}: {e}");
                    (inferred, String::new())
                }
            };
            let category = if self.config.prefixes.matches(&name) {
                Category::GpuAi
            } else {
                categorize_new_metric(&name, &prefix_map)
            };
            entries.push(MetricEntry {
                keywords: generate_keywords(&name, metric_type, &help, &self.config.keyword_rules),
                priority: self.config.priorities.assign(&name),
                name,
                metric_type,
                help,
                category,
            });
        }
        let n = entries.len();
        let best = select_from(question, intent, &entries, &self.config.scoring)
            .map_err(|e| PipelineError::Selection(e.to_string()))?;
        Ok((best, n))
    }
}

fn metadata_type(t: MetadataType) -> Option<MetricType> {
    match t {
        MetadataType::Counter => Some(MetricType::Counter),
        MetadataType::Gauge => Some(MetricType::Gauge),
        MetadataType::Histogram => Some(MetricType::Histogram),
        MetadataType::Summary => Some(MetricType::Summary),
        MetadataType::Unknown => None,
    }
}

/// Question words worth matching against metric names.
pub fn fallback_terms(question: &str, config: &EngineConfig) -> BTreeSet<String> {
    normalize(question)
        .split([' ', '-'])
        .filter(|w| w.len() >= 3 && !config.keyword_rules.stopwords.contains(*w))
        .map(str::to_string)
        .collect()
}

fn explain(entry: &MetricEntry, intent: &IntentResult, time: &TimeRangeInfo, path: AnswerPath) -> String {
    let help = entry.help.trim().trim_end_matches('.');
    let about = if help.is_empty() {
        String::new()
    } else {
        format!(": {help}")
    };
    let source = match path {
        AnswerPath::Catalog => "catalog",
        AnswerPath::ApiFallback => "live Prometheus metadata",
    };
    format!(
        "{} is a {} metric{about}. The question reads as a {} query over a {} window (rate syntax {}). Metric chosen from the {source}.",
        entry.name,
        entry.metric_type.as_str(),
        intent.intent.as_str().replace('_', " "),
        time.duration_text,
        time.rate_syntax,
    )
}
