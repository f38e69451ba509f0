//! PromQL generation from (metric, intent, time range) templates, plus the
//! repair and validity checks applied to every generated query.

mod repair;
mod scan;
mod validate;

use serde::{Deserialize, Serialize};

use crate::catalog::{MetricEntry, MetricType};
use crate::intent::{IntentKind, IntentResult};
use crate::temporal::TimeRangeInfo;

pub use repair::{repair, RepairKind};
pub use validate::{is_valid_promql, promql_issues};

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedQuery {
    pub promql: String,
    pub metric: String,
    /// Template cell, `<intent>.<type>`.
    pub template_id: String,
    pub time: TimeRangeInfo,
    pub repairs: Vec<RepairKind>,
    pub by_label: Option<String>,
}

/// Grouping label for comparison and ranking queries.
pub fn infer_by_label(intent: &IntentResult, _metric: &MetricEntry) -> String {
    const TABLE: [(&str, &str); 4] = [
        ("model", "model_name"),
        ("pod", "pod"),
        ("node", "node"),
        ("namespace", "namespace"),
    ];
    TABLE
        .iter()
        .find(|(term, _)| intent.domain_terms.contains(*term))
        .map_or("instance", |(_, label)| label)
        .to_string()
}

fn fmt_quantile(q: f64) -> String {
    format!("{q}")
}

/// The template for one (intent, type) cell, with `m` the metric name, `r`
/// the rate syntax, `q` the quantile, `k` the topk size and `l` the grouping
/// label.
pub fn render_template(
    intent: IntentKind,
    ty: MetricType,
    m: &str,
    r: &str,
    q: f64,
    k: usize,
    l: &str,
) -> String {
    use IntentKind as I;
    use MetricType as T;
    let q = fmt_quantile(q);
    let hq = || format!("histogram_quantile({q}, sum(rate({m}_bucket{r})) by (le))");
    let mean = || format!("sum(rate({m}_sum{r})) / sum(rate({m}_count{r}))");
    match (intent, ty) {
        (I::CurrentValue, T::Gauge | T::Summary) => m.to_string(),
        (I::CurrentValue, T::Counter) => format!("rate({m}{r})"),
        (I::CurrentValue, T::Histogram) => hq(),

        (I::Count, T::Gauge | T::Counter) => format!("count({m})"),
        (I::Count, T::Histogram | T::Summary) => format!("count({m}_count)"),

        (I::Average, T::Gauge) => format!("avg({m})"),
        (I::Average, T::Counter) => format!("avg(rate({m}{r}))"),
        (I::Average, T::Histogram | T::Summary) => mean(),

        (I::Percentile, T::Histogram) => hq(),
        (I::Percentile, T::Gauge) => format!("quantile({q}, {m})"),
        (I::Percentile, T::Counter) => format!("quantile({q}, rate({m}{r}))"),
        (I::Percentile, T::Summary) => format!("{m}{{quantile=\"{q}\"}}"),

        (I::Rate, T::Counter) => format!("sum(rate({m}{r}))"),
        (I::Rate, T::Gauge) => format!("rate({m}{r})"),
        (I::Rate, T::Histogram) => hq(),
        (I::Rate, T::Summary) => format!("sum(rate({m}_count{r}))"),

        (I::Trend, T::Counter) => format!("rate({m}{r})"),
        (I::Trend, T::Gauge | T::Summary) => format!("avg_over_time({m}{r})"),
        (I::Trend, T::Histogram) => hq(),

        (I::TopN, T::Counter) => format!("topk({k}, rate({m}{r}))"),
        (I::TopN, T::Gauge | T::Summary) => format!("topk({k}, {m})"),
        (I::TopN, T::Histogram) => {
            format!("topk({k}, histogram_quantile({q}, sum by ({l}, le)(rate({m}_bucket{r}))))")
        }

        (I::Comparison, T::Counter) => format!("sum by ({l})(rate({m}{r}))"),
        (I::Comparison, T::Gauge | T::Summary) => format!("avg by ({l})({m})"),
        (I::Comparison, T::Histogram) => {
            format!("histogram_quantile({q}, sum by ({l}, le)(rate({m}_bucket{r})))")
        }
    }
}

fn uses_label(intent: IntentKind, ty: MetricType) -> bool {
    intent == IntentKind::Comparison || (intent == IntentKind::TopN && ty == MetricType::Histogram)
}

pub fn generate(metric: &MetricEntry, intent: &IntentResult, time: &TimeRangeInfo) -> GeneratedQuery {
    let by_label = uses_label(intent.intent, metric.metric_type).then(|| infer_by_label(intent, metric));
    let raw = render_template(
        intent.intent,
        metric.metric_type,
        &metric.name,
        &time.rate_syntax,
        intent.quantile(),
        intent.top_k.unwrap_or(DEFAULT_TOP_K),
        by_label.as_deref().unwrap_or("instance"),
    );
    let (promql, repairs) = match repair(&raw, &time.rate_syntax) {
        Ok(x) => x,
        Err(e) => {
            log::warn!("template output failed repair: {e}");
            (raw, Vec::new())
        }
    };
    GeneratedQuery {
        promql,
        metric: metric.name.clone(),
        template_id: format!("{}.{}", intent.intent, metric.metric_type.as_str()),
        time: time.clone(),
        repairs,
        by_label,
    }
}
