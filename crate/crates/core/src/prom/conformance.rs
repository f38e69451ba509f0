//! Interface suite every [`PromApi`] implementation must pass.
//!
//! Each scenario pairs a [`FixtureSet`] with checks. The caller turns a
//! fixture set into a client: directly for the fixture transport, or by
//! serving the set over HTTP for a live client.

use serde_json::json;

use super::{FixtureSet, MetadataType, PromApi, PromError, ResultType, METADATA_PATH, NAMES_PATH, QUERY_PATH};
use crate::error::InputError;

pub const PARSE_ERROR: &str = "1:5: parse error: unclosed left parenthesis";

pub struct Outcome {
    pub scenario: &'static str,
    pub result: Result<(), String>,
}

type Check = fn(&dyn PromApi) -> Result<(), String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn names() -> FixtureSet {
    FixtureSet::new().with_names(&["up", "foo_total", "bar", "DCGM_FI_DEV_GPU_TEMP", "vllm:num_requests_running"])
}

fn check_names(c: &dyn PromApi) -> Result<(), String> {
    let got = c.list_metric_names().map_err(|e| e.to_string())?;
    ensure(
        got == ["up", "foo_total", "bar", "DCGM_FI_DEV_GPU_TEMP", "vllm:num_requests_running"],
        || format!("names {got:?}"),
    )
}

fn check_names_empty(c: &dyn PromApi) -> Result<(), String> {
    let got = c.list_metric_names().map_err(|e| e.to_string())?;
    ensure(got.is_empty(), || format!("expected no names, got {got:?}"))
}

fn check_names_error(c: &dyn PromApi) -> Result<(), String> {
    match c.list_metric_names() {
        Err(PromError::Api { status: 503, message, .. }) if message == "TSDB not ready" => Ok(()),
        other => Err(format!("expected API error, got {other:?}")),
    }
}

fn metadata() -> FixtureSet {
    let mut set = FixtureSet::new()
        .with_metadata("foo_total", "counter", "Total foos.")
        .with_metadata("http_request_duration_seconds", "histogram", "Request latency.");
    set.insert(METADATA_PATH, &[], 200, super::fixture::success_body(json!({})));
    set
}

fn check_metadata(c: &dyn PromApi) -> Result<(), String> {
    let m = c.fetch_metadata("foo_total").map_err(|e| e.to_string())?;
    ensure(m.metric_type == MetadataType::Counter && m.help == "Total foos.", || format!("{m:?}"))?;
    let m = c.fetch_metadata("http_request_duration_seconds").map_err(|e| e.to_string())?;
    ensure(m.metric_type == MetadataType::Histogram && m.help == "Request latency.", || format!("{m:?}"))?;
    let m = c.fetch_metadata("nope").map_err(|e| e.to_string())?;
    ensure(m.metric_type == MetadataType::Unknown && m.help.is_empty(), || format!("{m:?}"))
}

fn instant() -> FixtureSet {
    FixtureSet::new()
        .with_instant(
            "up",
            json!({"resultType": "vector", "result": [
                {"metric": {"__name__": "up", "job": "a"}, "value": [1700000000, "1"]},
                {"metric": {"__name__": "up", "job": "b"}, "value": [1700000000, "0"]}
            ]}),
        )
        .with_instant("1", json!({"resultType": "scalar", "result": [1700000000, "1"]}))
        .with_error(QUERY_PATH, &[("query", "sum(")], 400, "bad_data", PARSE_ERROR)
}

fn check_instant(c: &dyn PromApi) -> Result<(), String> {
    let r = c.instant_query("up", 1_700_000_000).map_err(|e| e.to_string())?;
    ensure(r.result_type == ResultType::Vector && r.series.len() == 2, || format!("{r:?}"))?;
    ensure(r.series[1].labels["job"] == "b" && r.series[1].samples[0].value == "0", || format!("{r:?}"))?;
    let r = c.instant_query("1", 1_700_000_000).map_err(|e| e.to_string())?;
    ensure(
        r.result_type == ResultType::Scalar && r.series[0].samples[0].as_f64() == Some(1.0),
        || format!("{r:?}"),
    )?;
    match c.instant_query("sum(", 1_700_000_000) {
        Err(PromError::Api { status: 400, message, .. }) if message == PARSE_ERROR => {}
        other => return Err(format!("expected parse error, got {other:?}")),
    }
    match c.instant_query("  ", 1_700_000_000) {
        Err(PromError::Input(InputError::EmptyQuery)) => Ok(()),
        other => Err(format!("expected input error, got {other:?}")),
    }
}

fn range() -> FixtureSet {
    let values = |base: i64| {
        (0..4)
            .map(|i| json!([1_700_000_000 + 60 * i, format!("{}", base + i)]))
            .collect::<Vec<_>>()
    };
    let mut set = FixtureSet::new().with_range(
        "rate(x_total[5m])",
        json!({"resultType": "matrix", "result": [
            {"metric": {"pod": "a"}, "values": values(10)},
            {"metric": {"pod": "b"}, "values": values(20)}
        ]}),
    );
    set.insert(
        super::RANGE_PATH,
        &[("query", "up"), ("step", "7200")],
        200,
        super::fixture::success_body(json!({"resultType": "matrix", "result": [
            {"metric": {"job": "a"}, "values": [[1700000000, "1"]]},
            {"metric": {"job": "b"}, "values": [[1700000000, "1"]]}
        ]})),
    );
    set
}

fn check_range(c: &dyn PromApi) -> Result<(), String> {
    let r = c
        .range_query("rate(x_total[5m])", 1_700_000_000, 1_700_000_180, 60)
        .map_err(|e| e.to_string())?;
    ensure(r.result_type == ResultType::Matrix && r.series.len() == 2, || format!("{r:?}"))?;
    for (s, base) in r.series.iter().zip([10, 20]) {
        let vals: Vec<String> = s.samples.iter().map(|x| x.value.clone()).collect();
        let want: Vec<String> = (0..4).map(|i| format!("{}", base + i)).collect();
        ensure(vals == want, || format!("{vals:?}"))?;
        ensure(s.samples.windows(2).all(|w| w[0].timestamp < w[1].timestamp), || "order".into())?;
    }
    let r = c.range_query("up", 1_700_000_000, 1_700_003_600, 7200).map_err(|e| e.to_string())?;
    ensure(r.series.iter().all(|s| s.samples.len() == 1), || format!("{r:?}"))?;
    match c.range_query("up", 5, 5, 60) {
        Err(PromError::Input(InputError::InvertedRange { .. })) => {}
        other => return Err(format!("expected input error, got {other:?}")),
    }
    match c.range_query("up", 5, 6, 0) {
        Err(PromError::Input(InputError::NonPositiveDuration(0))) => Ok(()),
        other => Err(format!("expected input error, got {other:?}")),
    }
}

fn warnings() -> FixtureSet {
    let mut set = FixtureSet::new();
    set.insert(
        QUERY_PATH,
        &[("query", "up")],
        200,
        json!({"status": "success", "warnings": ["partial response"],
               "data": {"resultType": "vector", "result": []}})
        .to_string(),
    );
    set.insert(NAMES_PATH, &[], 502, "<html>bad gateway</html>");
    set
}

fn check_warnings(c: &dyn PromApi) -> Result<(), String> {
    let r = c.instant_query("up", 1).map_err(|e| e.to_string())?;
    ensure(r.warnings == ["partial response"] && r.series.is_empty(), || format!("{r:?}"))?;
    match c.list_metric_names() {
        Err(PromError::Api { status: 502, .. }) => Ok(()),
        other => Err(format!("expected HTTP error, got {other:?}")),
    }
}

pub fn scenarios() -> Vec<(&'static str, FixtureSet, Check)> {
    let err = FixtureSet::new().with_error(NAMES_PATH, &[], 503, "unavailable", "TSDB not ready");
    vec![
        ("names", names(), check_names as Check),
        ("names_empty", FixtureSet::new().with_names::<&str>(&[]), check_names_empty),
        ("names_error", err, check_names_error),
        ("metadata", metadata(), check_metadata),
        ("instant", instant(), check_instant),
        ("range", range(), check_range),
        ("warnings", warnings(), check_warnings),
    ]
}

/// Run every scenario against clients produced by `connect`.
pub fn run(mut connect: impl FnMut(&FixtureSet) -> Box<dyn PromApi>) -> Vec<Outcome> {
    scenarios()
        .into_iter()
        .map(|(scenario, set, check)| Outcome {
            scenario,
            result: check(connect(&set).as_ref()),
        })
        .collect()
}
