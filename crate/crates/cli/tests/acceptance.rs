//! One pass/fail line per acceptance criterion.
//!
//! Run with `cargo test -p catalogql --test acceptance`.

mod common;
#[path = "../../core/tests/common/cases.rs"]
mod cases;

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cases::*;
use catalogql::catalog::synthetic::{fixture_live_names, validation_fixture};
use catalogql::catalog::{load_catalog, Catalog, Category, MetricEntry, MetricType, Priority};
use catalogql::config::EngineConfig;
use catalogql::discovery::{discover_gpu_metrics, merge_discovery};
use catalogql::generator::{render_template, repair};
use catalogql::intent::{detect_intent, IntentKind, IntentLexicon};
use catalogql::prom::{conformance, FixtureClient, FixtureSet, PromApi, METADATA_PATH};
use catalogql::selector::{candidates, score_metric, select_best, ScoredMetric, ScoringConfig};
use catalogql::service::{handle_message, Engine, TimeInput, TOOL_COUNT};
use catalogql::startup::run_startup;
use catalogql::temporal::{resolve_time, Strategy, TemporalConfig};
use catalogql::validation::{apply_report, validate_catalog};
use catalogql_cli::http::live_client;
use catalogql_cli::server::router;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn catalog_bytes() -> Vec<u8> {
    std::fs::read(core_dir().join("data/catalog.json")).unwrap()
}

fn shipped_engine() -> (Engine, Arc<FixtureClient>) {
    let catalog = load_catalog(&catalog_bytes()).unwrap();
    let set = FixtureSet::from_dir(&core_dir().join("fixtures/prometheus")).unwrap();
    let client = Arc::new(FixtureClient::from_set(set));
    let engine = Engine::new(catalog, EngineConfig::default(), Some(client.clone())).with_clock(|| NOW);
    (engine, client)
}

fn additive(s: &ScoredMetric) -> bool {
    s.s_total == s.s_keyword + s.s_type + s.s_specificity + s.s_priority
        && s.s_keyword == s.matched.iter().map(|h| h.weight).sum::<i64>()
}

fn golden_walkthroughs() -> Outcome {
    let started = Instant::now();
    let (engine, _) = shipped_engine();
    let summary = run_startup(&engine);
    ensure(summary.errors.is_empty(), || format!("startup errors {:?}", summary.errors))?;
    for (q, want) in [(Q1, A1), (Q2, A2), (Q3, A3)] {
        let a = engine
            .smart_discover(q, &TimeInput::Question, true, NOW)
            .map_err(|e| format!("{q}: {e}"))?;
        ensure(a.query.promql == want, || format!("{q}: got {}", a.query.promql))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("3/3 exact, {:.0} ms including catalog load", elapsed.as_secs_f64() * 1e3))
}

fn scoring_arithmetic() -> Outcome {
    let (engine, _) = shipped_engine();
    run_startup(&engine);
    let a = engine
        .smart_discover(Q1, &TimeInput::Question, false, NOW)
        .map_err(|e| e.to_string())?;
    let s = &a.selection;
    let hits: Vec<(&str, i64)> = s.matched.iter().map(|h| (h.pattern.as_str(), h.weight)).collect();
    ensure(hits.contains(&("ttft_exact", 20)) && hits.contains(&("vllm", 15)), || {
        format!("matched {hits:?}")
    })?;
    ensure(s.s_priority == 15, || format!("priority {}", s.s_priority))?;

    let cfg = &engine.config().scoring;
    let snapshot = engine.catalog().snapshot();
    let mut checked = 0;
    for q in [Q1, Q2, Q3] {
        let intent = detect_intent(q, &engine.config().lexicon).unwrap();
        for e in candidates(q, &snapshot).1 {
            let s = score_metric(q, e, &intent, cfg);
            ensure(additive(&s), || format!("{q}: {} not additive: {s:?}", e.name))?;
            checked += 1;
        }
        let a = engine.smart_discover(q, &TimeInput::Question, false, NOW).unwrap();
        ensure(additive(&a.selection), || format!("{q}: winner not additive"))?;
        checked += 1;
    }
    Ok(format!(
        "{} = {} + {} + {} + {}, +20 ttft +15 vllm +15 priority, {checked} scores additive",
        s.s_total, s.s_keyword, s.s_type, s.s_specificity, s.s_priority
    ))
}

fn temporal_suite() -> Outcome {
    let cfg = TemporalConfig::default();
    let mut seen = BTreeSet::new();
    for (expr, secs, rate, strategy) in TEMPORAL_CASES {
        let r = resolve_time(expr, None, NOW, &cfg).map_err(|e| format!("{expr:?}: {e}"))?;
        ensure((r.duration_seconds, r.rate_syntax.as_str(), r.strategy) == (*secs, *rate, *strategy), || {
            format!("{expr:?}: got ({}, {}, {})", r.duration_seconds, r.rate_syntax, r.strategy)
        })?;
        seen.insert(r.strategy.to_string());
    }
    let r = resolve_time("", Some((NOW - 7200, NOW)), NOW, &cfg).map_err(|e| e.to_string())?;
    ensure((r.duration_seconds, r.rate_syntax.as_str(), r.strategy) == (7200, "[2h]", Strategy::Explicit), || {
        format!("explicit: {r:?}")
    })?;
    seen.insert(r.strategy.to_string());
    let y = resolve_time("yesterday", None, NOW, &cfg).unwrap();
    ensure((y.start, y.end) == (NOW - DAY, NOW), || format!("yesterday {y:?}"))?;
    ensure(seen.len() == 6, || format!("strategies covered {seen:?}"))?;
    ensure(TEMPORAL_CASES.len() + 1 >= 25, || "fewer than 25 rows".into())?;

    const ITERS: usize = 10_000;
    let mut worst = Duration::ZERO;
    let started = Instant::now();
    for i in 0..ITERS {
        let expr = TEMPORAL_CASES[i % TEMPORAL_CASES.len()].0;
        let t = Instant::now();
        std::hint::black_box(resolve_time(std::hint::black_box(expr), None, NOW, &cfg).ok());
        worst = worst.max(t.elapsed());
    }
    let mean = started.elapsed() / ITERS as u32;
    ensure(mean < Duration::from_millis(1), || format!("mean {mean:?}"))?;
    Ok(format!(
        "{} rows, 6 strategies, mean {:.1} us over {ITERS} calls (max {:.2} ms)",
        TEMPORAL_CASES.len() + 1,
        mean.as_secs_f64() * 1e6,
        worst.as_secs_f64() * 1e3
    ))
}

fn candidate_filtering() -> Outcome {
    let catalog = load_catalog(&catalog_bytes()).map_err(|e| e.to_string())?;
    ensure(catalog.len() == 2000, || format!("catalog has {}", catalog.len()))?;
    let high = catalog.stats().high;
    let mut counts = Vec::new();
    for q in [Q1, Q2, Q3] {
        let (hints, c) = candidates(q, &catalog);
        ensure(hints == BTreeSet::from([Category::GpuAi]), || format!("{q}: hints {hints:?}"))?;
        ensure((30..=80).contains(&c.len()), || format!("{q}: {} candidates", c.len()))?;
        counts.push(c.len());
    }
    for q in ["what is the p99 latency", "how many happened today", "top 5 by error rate"] {
        let (hints, c) = candidates(q, &catalog);
        ensure(hints.is_empty(), || format!("{q}: unexpected hints {hints:?}"))?;
        ensure(c.iter().all(|e| e.priority == Priority::High), || format!("{q}: Medium candidate"))?;
        ensure(c.len() == high && (300..=400).contains(&c.len()), || format!("{q}: {} candidates", c.len()))?;
    }
    Ok(format!("gpu_ai hinted {counts:?}, unhinted {high} (High only)"))
}

// Repair fuzzing.

fn seed_queries() -> Vec<String> {
    let mut seeds = Vec::new();
    let metrics = [
        "vllm:time_to_first_token_seconds",
        "DCGM_FI_DEV_GPU_TEMP",
        "node_cpu_seconds_total",
        "apiserver_request_duration_seconds",
    ];
    for m in metrics {
        for intent in IntentKind::ALL {
            for ty in MetricType::ALL {
                for r in ["[5m]", "[1h]", "[7d]"] {
                    seeds.push(render_template(intent, ty, m, r, 0.95, 5, "instance"));
                }
            }
        }
    }
    seeds.extend(
        [
            A1,
            A2,
            A3,
            r#"sum by (job) (rate(http_requests_total{job="api",code=~"5.."}[5m]))"#,
            r#"rate(foo{job="x"}[5m] offset 1h)"#,
            r#"max_over_time(rate(foo[5m])[1h:])"#,
            r#"increase(errors_total{le="0.5",path="/a,b"}[10m])"#,
            r#"topk(3, sum by (pod)(irate(container_cpu_usage_seconds_total{namespace="ml"}[2m])))"#,
            r#"histogram_quantile(0.99, sum by (le, service) (rate(req_duration_seconds_bucket{service!="x"}[5m])))"#,
            r#"avg(node_memory_MemAvailable_bytes) / avg(node_memory_MemTotal_bytes)"#,
            r#"quantile_over_time(0.5, foo{a="]"}[1h])"#,
        ]
        .map(String::from),
    );
    seeds.sort();
    seeds.dedup();
    seeds
}

fn char_positions(s: &str, pred: impl Fn(char) -> bool) -> Vec<usize> {
    s.char_indices().filter(|(_, c)| pred(*c)).map(|(i, _)| i).collect()
}

fn mutate(rng: &mut ChaCha8Rng, q: &str) -> String {
    let mut s = q.to_string();
    for _ in 0..rng.gen_range(1..=3) {
        let op = rng.gen_range(0..9);
        match op {
            // Drop a closing delimiter.
            0 => {
                let at = char_positions(&s, |c| matches!(c, ')' | ']' | '}'));
                if let Some(&i) = at.choose(rng) {
                    s.remove(i);
                }
            }
            // Trailing comma before a closer.
            1 => {
                let at = char_positions(&s, |c| matches!(c, '}' | ')'));
                if let Some(&i) = at.choose(rng) {
                    s.insert_str(i, if rng.gen_bool(0.5) { "," } else { ", " });
                }
            }
            // Remove a whole range selector.
            2 => {
                if let (Some(a), Some(b)) = (s.find('['), s.find(']')) {
                    if a < b {
                        s.replace_range(a..=b, "");
                    }
                }
            }
            // Empty a range selector.
            3 => {
                if let (Some(a), Some(b)) = (s.find('['), s.find(']')) {
                    if a < b {
                        s.replace_range(a + 1..b, "");
                    }
                }
            }
            // Strip a range function wrapper, leaving a bare range.
            4 => {
                for f in ["rate(", "irate(", "increase(", "avg_over_time(", "max_over_time("] {
                    if let Some(i) = s.find(f) {
                        s.replace_range(i..i + f.len(), "");
                        if let Some(j) = s[i..].find(']').map(|j| i + j + 1) {
                            if s[j..].starts_with(')') {
                                s.remove(j);
                            }
                        }
                        break;
                    }
                }
            }
            // Extra closer or opener somewhere.
            5 => {
                let at = char_positions(&s, |_| true);
                let i = at.choose(rng).copied().unwrap_or(0);
                let c = *['(', ')', ')', '}', ']'].choose(rng).unwrap();
                s.insert(i, c);
            }
            // Delete a random character.
            6 => {
                let at = char_positions(&s, |_| true);
                if let Some(&i) = at.choose(rng) {
                    s.remove(i);
                }
            }
            // Trailing comma at the very end, or padding.
            7 => s.push_str([",", ", ", " ", ",,"].choose(rng).unwrap()),
            // Truncate.
            _ => {
                let at = char_positions(&s, |_| true);
                if at.len() > 4 {
                    let cut = at[rng.gen_range(at.len() / 2..at.len())];
                    s.truncate(cut);
                }
            }
        }
    }
    s
}

/// Index of every byte that sits inside a string literal.
fn in_string(s: &str) -> Vec<bool> {
    let b = s.as_bytes();
    let mut mask = vec![false; b.len()];
    let mut quote: Option<u8> = None;
    let mut i = 0;
    while i < b.len() {
        match quote {
            Some(q) => {
                mask[i] = true;
                if b[i] == b'\\' && q != b'`' && i + 1 < b.len() {
                    mask[i + 1] = true;
                    i += 1;
                } else if b[i] == q {
                    quote = None;
                }
            }
            None if matches!(b[i], b'"' | b'\'' | b'`') => {
                mask[i] = true;
                quote = Some(b[i]);
            }
            None => {}
        }
        i += 1;
    }
    mask
}

fn balanced(s: &str) -> bool {
    let mask = in_string(s);
    let mut stack = Vec::new();
    for (i, c) in s.bytes().enumerate() {
        if mask[i] {
            continue;
        }
        match c {
            b'(' | b'[' | b'{' => stack.push(c),
            b')' | b']' | b'}' => {
                let open = match c {
                    b')' => b'(',
                    b']' => b'[',
                    _ => b'{',
                };
                if stack.pop() != Some(open) {
                    return false;
                }
            }
            _ => {}
        }
    }
    stack.is_empty() && !s.is_empty()
}

fn code_only(s: &str) -> String {
    let mask = in_string(s);
    s.bytes().enumerate().map(|(i, c)| if mask[i] { 'x' } else { c as char }).collect()
}

fn trailing_comma(s: &str) -> bool {
    let code = code_only(s);
    let squeezed: String = code.chars().filter(|c| !c.is_whitespace()).collect();
    squeezed.contains(",}") || squeezed.contains(",)") || squeezed.ends_with(',')
}

fn top_level_range(s: &str) -> bool {
    let mut depth = 0i32;
    for c in code_only(s).chars() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            '[' if depth == 0 => return true,
            _ => {}
        }
    }
    false
}

/// Every rate/irate/increase call has a range selector directly in its argument.
fn range_calls_have_ranges(s: &str) -> bool {
    let code = code_only(s);
    let b = code.as_bytes();
    for f in ["rate(", "irate(", "increase("] {
        let mut from = 0;
        while let Some(off) = code[from..].find(f) {
            let start = from + off;
            from = start + f.len();
            if start > 0 && (b[start - 1].is_ascii_alphanumeric() || b[start - 1] == b'_' || b[start - 1] == b':') {
                continue;
            }
            let mut depth = 0i32;
            let mut found = false;
            for &c in &b[start + f.len()..] {
                match c {
                    b'(' | b'{' => depth += 1,
                    b')' if depth == 0 => break,
                    b')' | b'}' => depth -= 1,
                    b'[' if depth == 0 => found = true,
                    _ => {}
                }
            }
            if !found {
                return false;
            }
        }
    }
    true
}

fn repair_properties() -> Outcome {
    let seeds = seed_queries();
    for q in &seeds {
        let (out, kinds) = repair(q, "[5m]").map_err(|e| format!("seed {q}: {e}"))?;
        ensure(&out == q && kinds.is_empty(), || format!("seed changed: {q} -> {out} {kinds:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    const CORPUS: usize = 12_000;
    let (mut repaired, mut rejected, mut changed) = (0, 0, 0);
    for _ in 0..CORPUS {
        let seed = seeds.choose(&mut rng).unwrap();
        let input = mutate(&mut rng, seed);
        let (out, kinds) = match repair(&input, "[5m]") {
            Ok(r) => r,
            Err(_) => {
                rejected += 1;
                continue;
            }
        };
        repaired += 1;
        if !kinds.is_empty() {
            changed += 1;
        }
        ensure(balanced(&out), || format!("unbalanced: {input:?} -> {out:?}"))?;
        ensure(!trailing_comma(&out), || format!("trailing comma: {input:?} -> {out:?}"))?;
        ensure(!top_level_range(&out), || format!("bare range: {input:?} -> {out:?}"))?;
        ensure(range_calls_have_ranges(&out), || format!("range call without range: {input:?} -> {out:?}"))?;
        let again = repair(&out, "[5m]").map_err(|e| format!("second pass rejected {out:?}: {e}"))?;
        ensure(again == (out.clone(), vec![]), || format!("not idempotent: {out:?} -> {:?}", again.0))?;
    }
    ensure(repaired >= 10_000, || format!("only {repaired} inputs repaired"))?;
    Ok(format!(
        "{} seeds, {CORPUS} mutants: {repaired} repaired ({changed} changed), {rejected} rejected as unrepairable, 100% idempotent",
        seeds.len()
    ))
}

// Catalog lifecycle.

fn check_index(c: &Catalog) -> Result<(), String> {
    let mut rebuilt = HashMap::new();
    let mut total = 0;
    for (cat, list) in c.categories() {
        for e in list {
            total += 1;
            ensure(e.category == cat, || format!("{} listed under {cat}", e.name))?;
            ensure(rebuilt.insert(e.name.clone(), (e.category, e.priority)).is_none(), || {
                format!("{} listed twice", e.name)
            })?;
        }
        ensure(list.windows(2).all(|w| w[0].name < w[1].name), || format!("{cat} not sorted"))?;
    }
    ensure(total == c.len(), || format!("len {} vs {total}", c.len()))?;
    ensure(&rebuilt == c.flat_lookup(), || "flat_lookup differs from a rebuild".into())
}

fn random_live(rng: &mut ChaCha8Rng, base: &[String], round: usize) -> Vec<String> {
    let mut live: Vec<String> = base.iter().filter(|_| rng.gen_bool(0.97)).cloned().collect();
    for i in 0..rng.gen_range(0..12) {
        let n = round * 100 + i;
        let name = match rng.gen_range(0..6) {
            0 => format!("DCGM_FI_PROF_CUSTOM_{n}"),
            1 => format!("vllm:custom_{n}_total"),
            2 => format!("habanalabs_custom_{n}"),
            3 => format!("shop_orders_{n}_total"),
            4 => {
                live.push(format!("app_latency_{n}_seconds_sum"));
                live.push(format!("app_latency_{n}_seconds_count"));
                format!("app_latency_{n}_seconds_bucket")
            }
            _ => format!("node_extra_{n}_bytes"),
        };
        live.push(name);
    }
    live.shuffle(rng);
    live
}

fn catalog_lifecycle() -> Outcome {
    let bytes = catalog_bytes();
    let mut loads = Vec::new();
    let mut catalog = None;
    for _ in 0..5 {
        let t = Instant::now();
        catalog = Some(load_catalog(&bytes).map_err(|e| e.to_string())?);
        loads.push(t.elapsed());
    }
    loads.sort();
    let load = loads[2];
    ensure(load < Duration::from_millis(50), || format!("load median {load:?}"))?;
    let catalog = catalog.unwrap();
    check_index(&catalog)?;

    let mut worst_filter = Duration::ZERO;
    for c in Category::ALL {
        let t = Instant::now();
        std::hint::black_box(catalog.metrics_in_categories(&[c], true));
        worst_filter = worst_filter.max(t.elapsed());
    }
    let t = Instant::now();
    std::hint::black_box(catalog.metrics_in_categories(&[], false));
    worst_filter = worst_filter.max(t.elapsed());
    ensure(worst_filter < Duration::from_millis(10), || format!("filter {worst_filter:?}"))?;

    let cfg = EngineConfig::default();
    let base_live = fixture_live_names(&cfg.keyword_rules);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut steps = 0;
    for seq in 0..20 {
        let mut c = catalog.clone();
        for round in 0..rng.gen_range(2..6) {
            let live = random_live(&mut rng, &base_live, seq * 10 + round);
            let names = || live.iter().map(String::as_str);
            let d = discover_gpu_metrics(names(), &cfg.prefixes, &cfg.priorities, &cfg.keyword_rules);
            let r = validate_catalog(&c, names(), &cfg.prefixes);
            if rng.gen_bool(0.5) {
                merge_discovery(&mut c, &d);
                check_index(&c)?;
                apply_report(&mut c, &r, &cfg.keyword_rules);
            } else {
                apply_report(&mut c, &r, &cfg.keyword_rules);
                check_index(&c)?;
                merge_discovery(&mut c, &d);
            }
            check_index(&c)?;
            // Re-applying either merge changes nothing.
            let snapshot = c.to_json();
            ensure(merge_discovery(&mut c, &d) == 0, || "discovery merge not idempotent".into())?;
            ensure(apply_report(&mut c, &r, &cfg.keyword_rules) == (0, 0), || "validation not idempotent".into())?;
            ensure(c.to_json() == snapshot, || "re-merge changed the catalog".into())?;
            // The catalog now agrees with the live list.
            let again = validate_catalog(&c, names(), &cfg.prefixes);
            ensure(again.stale.is_empty() && again.adopted.is_empty(), || {
                format!("not a fixed point: {:?} {:?}", again.stale, again.adopted)
            })?;
            ensure(d.discovered.iter().all(|e| c.contains(&e.name)), || "discovered entry missing".into())?;
            steps += 1;
        }
    }
    Ok(format!(
        "load median {:.1} ms, filter max {:.3} ms, {steps} randomized merge rounds consistent",
        load.as_secs_f64() * 1e3,
        worst_filter.as_secs_f64() * 1e3
    ))
}

fn validation_arithmetic() -> Outcome {
    let cfg = EngineConfig::default();
    let fx = validation_fixture(&cfg.keyword_rules);
    ensure(fx.catalog.len() == 1995, || format!("fixture catalog {}", fx.catalog.len()))?;
    let r = validate_catalog(&fx.catalog, fx.live_names.iter().map(String::as_str), &cfg.prefixes);
    let mut stale = fx.stale.clone();
    stale.sort();
    ensure(r.stale == stale, || format!("stale {:?}", r.stale))?;
    let adopted: BTreeSet<(String, Category)> = r.adopted.iter().map(|a| (a.name.clone(), a.category)).collect();
    let want: BTreeSet<(String, Category)> = fx.adopted.iter().cloned().collect();
    ensure(adopted == want, || format!("adopted {adopted:?}"))?;
    let mut c = fx.catalog.clone();
    let (removed, added) = apply_report(&mut c, &r, &cfg.keyword_rules);
    ensure(c.len() == 1992, || format!("total {}", c.len()))?;
    check_index(&c)?;
    Ok(format!("1995 - {removed} + {added} = {}", c.len()))
}

// Selector oracle: an independent brute-force scorer.

fn oracle_normalize(text: &str) -> String {
    let folded: String = text
        .to_lowercase()
        .chars()
        .filter(|c| *c != '\'' && *c != '\u{2019}')
        .map(|c| if c.is_ascii_alphanumeric() || ":_-".contains(c) { c } else { ' ' })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn has_phrase(question: &str, phrase: &str) -> bool {
    let p = oracle_normalize(phrase);
    !p.is_empty() && format!(" {} ", oracle_normalize(question)).contains(&format!(" {p} "))
}

fn run_of(words: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || words.is_empty() {
        return false;
    }
    let sep = '\u{1}';
    let hay = format!("{sep}{}{sep}", words.join(&sep.to_string()));
    hay.contains(&format!("{sep}{}{sep}", needle.join(&sep.to_string())))
}

fn words(s: &str, seps: &[char]) -> Vec<String> {
    s.to_lowercase()
        .split(|c: char| seps.contains(&c) || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

fn oracle_pick(question: &str, intent: IntentKind, catalog: &Catalog, cfg: &ScoringConfig) -> Option<(String, i64)> {
    let hinted: Vec<Category> = catalog
        .category_keywords()
        .iter()
        .filter(|(_, kws)| kws.iter().any(|k| has_phrase(question, k)))
        .map(|(c, _)| *c)
        .collect();
    let pool: Vec<&MetricEntry> = catalog
        .entries()
        .filter(|e| if hinted.is_empty() { e.priority == Priority::High } else { hinted.contains(&e.category) })
        .collect();
    let preferred = |t: MetricType| match intent {
        IntentKind::Percentile => t == MetricType::Histogram,
        IntentKind::Rate => t == MetricType::Counter,
        IntentKind::CurrentValue | IntentKind::Trend => t == MetricType::Gauge,
        IntentKind::Count => matches!(t, MetricType::Gauge | MetricType::Counter),
        _ => false,
    };
    let mut best: Option<(i64, bool, String)> = None;
    for e in pool {
        let tokens = words(&e.name, &['_', ':']);
        let kw: Vec<Vec<String>> = e.keywords.iter().map(|k| words(k, &['_', ':', '-'])).collect();
        let mut total = 0;
        for p in &cfg.keyword_patterns {
            let asked = p.question_terms.iter().any(|t| has_phrase(question, t));
            let relevant = p.entry_terms.iter().any(|t| {
                let w = words(t, &['_', ':', '-']);
                run_of(&tokens, &w) || kw.iter().any(|k| run_of(k, &w))
            });
            if asked && relevant {
                total += p.weight;
            }
        }
        if preferred(e.metric_type) {
            total += cfg.type_match_bonus;
        }
        total += (cfg.specificity_per_token * (tokens.len() as i64 - 1).max(0)).min(cfg.specificity_cap);
        total += cfg.priority_bonus.get(&e.priority).copied().unwrap_or(0);
        let key = (total, e.priority == Priority::High, e.name.clone());
        let better = match &best {
            None => true,
            Some((t, h, n)) => (key.0, key.1) > (*t, *h) || ((key.0, key.1) == (*t, *h) && key.2 < *n),
        };
        if better {
            best = Some(key);
        }
    }
    best.map(|(t, _, n)| (n, t))
}

const NAMESPACES: &[&str] = &[
    "DCGM_FI_DEV", "DCGM_FI_PROF", "vllm:", "nvidia_gpu", "node", "container", "kube_pod", "etcd_server",
    "apiserver", "coredns", "kubelet", "scheduler",
];
const TOKENS: &[&str] = &[
    "gpu", "temp", "temperature", "memory", "mem", "used", "bytes", "time_to_first_token", "time_per_output_token",
    "seconds", "tokens", "generation", "total", "cache", "kv", "cpu", "network", "receive", "transmit", "latency",
    "duration", "errors", "pod", "kube", "disk", "io", "requests", "xid", "nvlink", "fb", "power", "usage",
    "cuda", "dcgm", "util", "ttft", "inter_token_latency", "restarts", "packets", "thermal",
];
const KEYWORDS: &[&str] = &[
    "gpu", "temperature", "kv cache", "time to first token", "tokens", "latency", "memory", "network", "cpu",
    "errors", "pod", "vllm", "cuda", "throughput", "disk", "requests", "power",
];
const LEADS: &[&str] = &[
    "what is the", "how many", "average", "p99", "top 5", "compare", "trend of", "rate of", "show me",
    "how has", "what's the current", "per second",
];
const TOPICS: &[&str] = &[
    "gpu temperature", "ttft", "vllm tokens", "memory usage", "kv cache hit rate", "cpu", "network traffic",
    "latency", "errors", "pods restarting", "etcd", "disk io", "scheduler latency", "dcgm power", "cuda",
    "time to first token", "inter-token latency", "kubelet", "dns lookups", "gpu memory", "hot gpus",
    "api server requests", "storage", "tpot", "throughput",
];
const TAILS: &[&str] = &["", " over the last hour", " since yesterday", " in the past 7d", " by node", "?"];

fn random_catalog(rng: &mut ChaCha8Rng) -> Catalog {
    let mut c = Catalog::empty();
    let n = rng.gen_range(5..=100);
    while c.len() < n {
        let ns = *NAMESPACES.choose(rng).unwrap();
        let parts: Vec<&str> = (0..rng.gen_range(1..=3)).map(|_| *TOKENS.choose(rng).unwrap()).collect();
        let sep = if ns.ends_with(':') { "" } else { "_" };
        let name = format!("{ns}{sep}{}", parts.join("_"));
        let keywords = (0..rng.gen_range(0..=4)).map(|_| KEYWORDS.choose(rng).unwrap().to_string()).collect();
        c.insert(MetricEntry {
            name,
            metric_type: *MetricType::ALL.choose(rng).unwrap(),
            help: String::new(),
            priority: if rng.gen_bool(0.4) { Priority::High } else { Priority::Medium },
            keywords,
            category: *Category::ALL.choose(rng).unwrap(),
        });
    }
    c
}

fn selector_oracle() -> Outcome {
    let cfg = ScoringConfig::builtin();
    let lexicon = IntentLexicon::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut agreed, mut empty) = (0, 0);
    for _ in 0..100 {
        let catalog = random_catalog(&mut rng);
        for _ in 0..50 {
            let q = format!(
                "{} {}{}",
                LEADS.choose(&mut rng).unwrap(),
                TOPICS.choose(&mut rng).unwrap(),
                TAILS.choose(&mut rng).unwrap()
            );
            let intent = detect_intent(&q, &lexicon).map_err(|e| e.to_string())?;
            let got = select_best(&q, &intent, &catalog, &cfg).ok();
            if let Some(s) = &got {
                ensure(additive(s), || format!("{q}: not additive"))?;
            }
            let got = got.map(|s| (s.entry.name, s.s_total));
            let want = oracle_pick(&q, intent.intent, &catalog, &cfg);
            ensure(got == want, || format!("{q:?}: select_best {got:?}, oracle {want:?}"))?;
            if want.is_none() {
                empty += 1;
            }
            agreed += 1;
        }
    }
    Ok(format!("{agreed}/5000 winners agree ({empty} with no candidates on both sides)"))
}

fn wire_conformance() -> Outcome {
    let (engine, client) = shipped_engine();
    // Catalog answers never ask Prometheus for metadata.
    for q in [Q1, Q2, Q3] {
        engine.smart_discover(q, &TimeInput::Question, true, NOW).map_err(|e| e.to_string())?;
    }
    ensure(client.calls(METADATA_PATH) == 0, || format!("{} metadata calls", client.calls(METADATA_PATH)))?;

    let server = common::spawn(router(engine.clone()));
    let http = reqwest::blocking::Client::new();
    let post = |body: &str| -> Result<Value, String> {
        let text = http
            .post(format!("{}/rpc", server.url()))
            .header("content-type", "application/json")
            .body(body.to_string())
            .send()
            .and_then(|r| r.text())
            .map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| format!("{e}: {text}"))
    };
    let code = |v: &Value| v["error"]["code"].as_i64();
    let v = post("{\"jsonrpc\": \"2.0\", \"id\": 1, \"method\"")?;
    ensure(code(&v) == Some(-32700), || format!("parse error reply {v}"))?;
    let v = post(r#"{"jsonrpc":"2.0","id":2,"method":"no_such_tool"}"#)?;
    ensure(code(&v) == Some(-32601), || format!("unknown method reply {v}"))?;
    let v = post(r#"{"jsonrpc":"2.0","id":3,"method":"smart_discover","params":{"question":7}}"#)?;
    ensure(code(&v) == Some(-32602), || format!("invalid params reply {v}"))?;
    let v = post(r#"{"jsonrpc":"2.0","id":4,"method":"tools/list"}"#)?;
    let listed = v["result"]["tools"].as_array().map_or(0, Vec::len);
    ensure(listed == 12 && TOOL_COUNT == 12, || format!("{listed} tools listed"))?;
    let direct: Value =
        serde_json::from_str(&handle_message(&engine, r#"{"jsonrpc":"2.0","id":5,"method":"tools/list"}"#).unwrap())
            .unwrap();
    ensure(direct["result"] == v["result"], || "HTTP and in-process tool lists differ".into())?;

    let fixture = conformance::run(|set| Box::new(FixtureClient::from_set(set.clone())) as Box<dyn PromApi>);
    let mut servers = Vec::new();
    let live = conformance::run(|set| {
        let s = common::replay_server(set.clone());
        let c = live_client(&s.url(), Duration::from_secs(5), None).unwrap();
        servers.push(s);
        Box::new(c) as Box<dyn PromApi>
    });
    for (label, outcomes) in [("fixture", &fixture), ("live", &live)] {
        for o in outcomes.iter() {
            ensure(o.result.is_ok(), || format!("{label} client, {}: {:?}", o.scenario, o.result))?;
        }
    }
    let names = |o: &[conformance::Outcome]| o.iter().map(|x| x.scenario).collect::<Vec<_>>();
    ensure(names(&fixture) == names(&live), || "suites differ".into())?;
    Ok(format!(
        "-32700/-32601/-32602 over HTTP, 12 tools, {} conformance scenarios pass on fixture and live clients, 0 metadata calls",
        fixture.len()
    ))
}

fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("golden walkthroughs", golden_walkthroughs),
        ("scoring arithmetic", scoring_arithmetic),
        ("temporal suite", temporal_suite),
        ("candidate filtering", candidate_filtering),
        ("repair properties", repair_properties),
        ("catalog lifecycle", catalog_lifecycle),
        ("validation arithmetic", validation_arithmetic),
        ("selector oracle", selector_oracle),
        ("wire conformance", wire_conformance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| Err(panic_text(p)));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("{}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
