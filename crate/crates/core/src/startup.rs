//! Startup orchestration: GPU discovery and catalog validation against the
//! live series list, each bounded by a deadline.
//!
//! Both stages read the same catalog snapshot and touch disjoint name sets
//! (validation ignores vendor-prefixed names), so their merges commute and
//! may land in either order.

use std::time::Duration;

use serde::Serialize;

use crate::discovery::{discover_gpu_metrics, merge_discovery, DiscoveryResult, Vendor};
use crate::service::Engine;
use crate::validation::{apply_report, validate_catalog, ValidationReport};

pub const STAGE_DEADLINE: Duration = Duration::from_secs(10);

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StartupSummary {
    pub primary_vendor: Option<Vendor>,
    pub gpu_discovered: usize,
    pub gpu_added: usize,
    pub stale_removed: usize,
    pub adopted: usize,
    pub timed_out: Vec<&'static str>,
    pub errors: Vec<String>,
}

enum StageOutput {
    Discovery(DiscoveryResult),
    Validation(ValidationReport),
}

fn run_discovery(engine: &Engine) -> Result<DiscoveryResult, String> {
    let prom = engine.prom().ok_or("no Prometheus endpoint")?;
    let names = prom.list_metric_names().map_err(|e| e.to_string())?;
    let cfg = engine.config();
    Ok(discover_gpu_metrics(
        names.iter().map(String::as_str),
        &cfg.prefixes,
        &cfg.priorities,
        &cfg.keyword_rules,
    ))
}

fn run_validation(engine: &Engine) -> Result<ValidationReport, String> {
    let prom = engine.prom().ok_or("no Prometheus endpoint")?;
    let names = prom.list_metric_names().map_err(|e| e.to_string())?;
    let snapshot = engine.catalog().snapshot();
    Ok(validate_catalog(
        &snapshot,
        names.iter().map(String::as_str),
        &engine.config().prefixes,
    ))
}

fn apply(engine: &Engine, out: StageOutput, summary: &mut StartupSummary) {
    match out {
        StageOutput::Discovery(d) => {
            let added = engine.catalog().update(|c| merge_discovery(c, &d));
            summary.primary_vendor = d.primary_vendor;
            summary.gpu_discovered = d.discovered.len();
            summary.gpu_added = added;
            engine.readiness().set_gpu_merged();
            log::info!(
                "GPU discovery: {} metrics ({} new), vendor {:?}, {:?}",
                d.discovered.len(),
                added,
                d.primary_vendor,
                d.elapsed
            );
        }
        StageOutput::Validation(r) => {
            let rules = &engine.config().keyword_rules;
            let (removed, added) = engine.catalog().update(|c| apply_report(c, &r, rules));
            summary.stale_removed = removed;
            summary.adopted = added;
            engine.readiness().set_validated();
            log::info!("catalog validation: {removed} stale removed, {added} adopted, {:?}", r.elapsed);
        }
    }
}

/// Run both stages on the calling thread.
pub fn run_startup(engine: &Engine) -> StartupSummary {
    let mut summary = StartupSummary::default();
    match run_discovery(engine) {
        Ok(d) => apply(engine, StageOutput::Discovery(d), &mut summary),
        Err(e) => summary.errors.push(format!("discovery: {e}")),
    }
    match run_validation(engine) {
        Ok(r) => apply(engine, StageOutput::Validation(r), &mut summary),
        Err(e) => summary.errors.push(format!("validation: {e}")),
    }
    summary
}

/// Run both stages on worker threads. A stage that misses `deadline` is
/// abandoned with a warning and the catalog keeps its static contents.
#[cfg(not(target_arch = "wasm32"))]
pub fn spawn_startup(engine: Engine, deadline: Duration) -> std::thread::JoinHandle<StartupSummary> {
    use std::sync::mpsc;
    use std::time::Instant;

    std::thread::spawn(move || {
        let started = Instant::now();
        let (tx, rx) = mpsc::channel::<Result<StageOutput, String>>();
        let stages: [(&str, fn(&Engine) -> Result<StageOutput, String>); 2] = [
            ("discovery", |e| run_discovery(e).map(StageOutput::Discovery)),
            ("validation", |e| run_validation(e).map(StageOutput::Validation)),
        ];
        for (name, stage) in stages {
            let tx = tx.clone();
            let engine = engine.clone();
            let spawned = std::thread::Builder::new()
                .name(format!("startup-{name}"))
                .spawn(move || {
                    let _ = tx.send(stage(&engine).map_err(|e| format!("{name}: {e}")));
                });
            if let Err(e) = spawned {
                log::warn!("could not start {name}: {e}");
            }
        }
        drop(tx);

        let mut summary = StartupSummary::default();
        let mut pending = vec!["discovery", "validation"];
        while !pending.is_empty() {
            let left = deadline.saturating_sub(started.elapsed());
            match rx.recv_timeout(left) {
                Ok(Ok(out)) => {
                    pending.retain(|s| {
                        *s != match out {
                            StageOutput::Discovery(_) => "discovery",
                            StageOutput::Validation(_) => "validation",
                        }
                    });
                    apply(&engine, out, &mut summary);
                }
                Ok(Err(e)) => {
                    log::warn!("startup stage failed: {e}");
                    pending.retain(|s| !e.starts_with(s));
                    summary.errors.push(e);
                }
                Err(mpsc::RecvTimeoutError::Timeout) => {
                    for s in &pending {
                        log::warn!("{s} missed its {deadline:?} deadline; continuing with the static catalog");
                    }
                    summary.timed_out = pending;
                    break;
                }
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
        }
        summary
    })
}
