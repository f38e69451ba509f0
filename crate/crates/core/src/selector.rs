//! Category hinting, candidate filtering and additive metric scoring.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::naming::name_tokens;
use crate::catalog::{Catalog, Category, MetricEntry, MetricType, Priority};
use crate::error::{ConfigError, NoMetricFound};
use crate::intent::{IntentKind, IntentResult};
use crate::text::{normalize, Normalized};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordPattern {
    pub id: String,
    pub weight: i64,
    /// Phrases that must occur in the question.
    pub question_terms: Vec<String>,
    /// Terms that make an entry relevant, matched against name tokens and
    /// keyword words.
    pub entry_terms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub keyword_patterns: Vec<KeywordPattern>,
    pub type_match_bonus: i64,
    pub specificity_per_token: i64,
    pub specificity_cap: i64,
    pub priority_bonus: BTreeMap<Priority, i64>,
}

impl ScoringConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: ScoringConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            file: "scoring.json".into(),
            message: e.to_string(),
        })?;
        let mut ids = BTreeSet::new();
        for p in &mut cfg.keyword_patterns {
            if !ids.insert(p.id.clone()) {
                return Err(ConfigError::Invalid(format!(
                    "scoring.json: duplicate pattern id `{}`",
                    p.id
                )));
            }
            p.question_terms = p.question_terms.iter().map(|t| normalize(t)).collect();
            p.entry_terms = p.entry_terms.iter().map(|t| t.to_lowercase()).collect();
        }
        Ok(cfg)
    }

    pub fn builtin() -> Self {
        Self::from_json(crate::config::SCORING_JSON).expect("shipped scoring config is valid")
    }

    pub fn priority_bonus(&self, p: Priority) -> i64 {
        self.priority_bonus.get(&p).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternHit {
    pub pattern: String,
    pub weight: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredMetric {
    pub entry: MetricEntry,
    pub s_keyword: i64,
    pub s_type: i64,
    pub s_specificity: i64,
    pub s_priority: i64,
    pub s_total: i64,
    /// Patterns that contributed to `s_keyword`, in config order.
    pub matched: Vec<PatternHit>,
}

impl ScoredMetric {
    /// Ranking order: higher total first, then High before Medium, then the
    /// smaller name.
    pub fn rank_cmp(&self, other: &ScoredMetric) -> Ordering {
        other
            .s_total
            .cmp(&self.s_total)
            .then(self.entry.priority.cmp(&other.entry.priority))
            .then_with(|| self.entry.name.cmp(&other.entry.name))
    }
}

/// Categories whose keywords occur in the question as whole words/phrases.
pub fn extract_category_hints(
    question: &str,
    category_keywords: &BTreeMap<Category, Vec<String>>,
) -> BTreeSet<Category> {
    let q = Normalized::new(question);
    category_keywords
        .iter()
        .filter(|(_, kws)| kws.iter().any(|k| q.has(&normalize(k))))
        .map(|(c, _)| *c)
        .collect()
}

fn split_words(s: &str) -> Vec<String> {
    s.split(|c: char| c == '_' || c == ':' || c == '-' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_run(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Whether the entry carries a pattern-relevant term.
fn entry_relevant(pattern: &KeywordPattern, tokens: &[String], keyword_words: &[Vec<String>]) -> bool {
    pattern.entry_terms.iter().any(|t| {
        let words = split_words(t);
        contains_run(tokens, &words) || keyword_words.iter().any(|k| contains_run(k, &words))
    })
}

pub fn type_matches(intent: IntentKind, ty: MetricType) -> bool {
    use IntentKind as I;
    use MetricType as T;
    matches!(
        (intent, ty),
        (I::Percentile, T::Histogram)
            | (I::Rate, T::Counter)
            | (I::CurrentValue, T::Gauge)
            | (I::Trend, T::Gauge)
            | (I::Count, T::Gauge | T::Counter)
    )
}

fn score_with(
    q: &Normalized,
    entry: &MetricEntry,
    intent: &IntentResult,
    cfg: &ScoringConfig,
) -> ScoredMetric {
    let tokens: Vec<String> = name_tokens(&entry.name).collect();
    let keyword_words: Vec<Vec<String>> = entry.keywords.iter().map(|k| split_words(k)).collect();

    let matched: Vec<PatternHit> = cfg
        .keyword_patterns
        .iter()
        .filter(|p| p.question_terms.iter().any(|t| q.has(t)))
        .filter(|p| entry_relevant(p, &tokens, &keyword_words))
        .map(|p| PatternHit {
            pattern: p.id.clone(),
            weight: p.weight,
        })
        .collect();
    let s_keyword = matched.iter().map(|h| h.weight).sum();
    let s_type = if type_matches(intent.intent, entry.metric_type) {
        cfg.type_match_bonus
    } else {
        0
    };
    let extra = tokens.len().saturating_sub(1) as i64;
    let s_specificity = (extra * cfg.specificity_per_token).min(cfg.specificity_cap);
    let s_priority = cfg.priority_bonus(entry.priority);
    ScoredMetric {
        entry: entry.clone(),
        s_keyword,
        s_type,
        s_specificity,
        s_priority,
        s_total: s_keyword + s_type + s_specificity + s_priority,
        matched,
    }
}

pub fn score_metric(
    question: &str,
    entry: &MetricEntry,
    intent: &IntentResult,
    cfg: &ScoringConfig,
) -> ScoredMetric {
    score_with(&Normalized::new(question), entry, intent, cfg)
}

/// Score every candidate and return the best one.
pub fn select_from<'a, I>(
    question: &str,
    intent: &IntentResult,
    candidates: I,
    cfg: &ScoringConfig,
) -> Result<ScoredMetric, NoMetricFound>
where
    I: IntoIterator<Item = &'a MetricEntry>,
{
    let q = Normalized::new(question);
    candidates
        .into_iter()
        .map(|e| score_with(&q, e, intent, cfg))
        .min_by(ScoredMetric::rank_cmp)
        .ok_or(NoMetricFound)
}

/// Candidate entries for a question: everything in the hinted categories,
/// or every High entry when nothing was hinted.
pub fn candidates<'c>(question: &str, catalog: &'c Catalog) -> (BTreeSet<Category>, Vec<&'c MetricEntry>) {
    let hints = extract_category_hints(question, catalog.category_keywords());
    let list: Vec<Category> = hints.iter().copied().collect();
    let c = catalog.metrics_in_categories(&list, !hints.is_empty());
    (hints, c)
}

pub fn select_best(
    question: &str,
    intent: &IntentResult,
    catalog: &Catalog,
    cfg: &ScoringConfig,
) -> Result<ScoredMetric, NoMetricFound> {
    let (_, cands) = candidates(question, catalog);
    select_from(question, intent, cands, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::{detect_intent, IntentLexicon};

    fn entry(name: &str, ty: MetricType, pri: Priority, kws: &[&str]) -> MetricEntry {
        MetricEntry {
            name: name.into(),
            metric_type: ty,
            help: String::new(),
            priority: pri,
            keywords: kws.iter().map(|s| s.to_string()).collect(),
            category: Category::GpuAi,
        }
    }

    fn intent(q: &str) -> IntentResult {
        detect_intent(q, &IntentLexicon::builtin()).unwrap()
    }

    #[test]
    fn shipped_weights() {
        let cfg = ScoringConfig::builtin();
        let w = |id: &str| cfg.keyword_patterns.iter().find(|p| p.id == id).unwrap().weight;
        assert_eq!(w("ttft_exact"), 20);
        assert_eq!(w("vllm"), 15);
        assert_eq!(w("temperature"), 15);
        assert_eq!(w("token"), 12);
        assert_eq!(w("latency"), 10);
        assert_eq!(w("kubernetes"), 8);
        assert_eq!(cfg.priority_bonus(Priority::High), 15);
        assert_eq!(cfg.priority_bonus(Priority::Medium), 5);
    }

    #[test]
    fn hints() {
        let kw = crate::config::default_category_keywords();
        let h = extract_category_hints("What is the TTFT for my vLLM deployment?", &kw);
        assert_eq!(h, BTreeSet::from([Category::GpuAi]));
        assert!(extract_category_hints("weather is nice", &kw).is_empty());
        assert!(extract_category_hints("etcd disk latency on nodes", &kw).contains(&Category::Etcd));
    }

    #[test]
    fn ttft_breakdown() {
        let q = "What is the TTFT for my vLLM deployment?";
        let e = entry(
            "vllm:time_to_first_token_seconds",
            MetricType::Histogram,
            Priority::High,
            &["ttft", "time to first token"],
        );
        let s = score_metric(q, &e, &intent(q), &ScoringConfig::builtin());
        assert_eq!(s.s_keyword, 35);
        assert_eq!(s.s_priority, 15);
        assert_eq!(s.s_total, s.s_keyword + s.s_type + s.s_specificity + s.s_priority);
    }

    #[test]
    fn question_only_match_adds_nothing() {
        let q = "gpu temperature";
        let e = entry("etcd_server_has_leader", MetricType::Gauge, Priority::Medium, &[]);
        let s = score_metric(q, &e, &intent(q), &ScoringConfig::builtin());
        assert_eq!(s.s_keyword, 0);
        assert_eq!(s.s_priority, 5);
    }

    #[test]
    fn ties_go_to_the_smaller_name() {
        let a = entry("zz_metric_x", MetricType::Gauge, Priority::High, &[]);
        let b = entry("aa_metric_x", MetricType::Gauge, Priority::High, &[]);
        let q = "what is it";
        let best = select_from(q, &intent(q), [&a, &b], &ScoringConfig::builtin()).unwrap();
        assert_eq!(best.entry.name, "aa_metric_x");
    }

    #[test]
    fn empty_candidates() {
        let q = "what is it";
        let none: [&MetricEntry; 0] = [];
        assert_eq!(
            select_from(q, &intent(q), none, &ScoringConfig::builtin()),
            Err(NoMetricFound)
        );
    }
}
