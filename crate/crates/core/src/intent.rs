//! Keyword-triggered intent classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, InputError};
use crate::text::{normalize, Normalized};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentKind {
    CurrentValue,
    Count,
    Average,
    Percentile,
    TopN,
    Comparison,
    Trend,
    Rate,
}

impl IntentKind {
    pub const ALL: [IntentKind; 8] = [
        IntentKind::CurrentValue,
        IntentKind::Count,
        IntentKind::Average,
        IntentKind::Percentile,
        IntentKind::TopN,
        IntentKind::Comparison,
        IntentKind::Trend,
        IntentKind::Rate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntentKind::CurrentValue => "current_value",
            IntentKind::Count => "count",
            IntentKind::Average => "average",
            IntentKind::Percentile => "percentile",
            IntentKind::TopN => "top_n",
            IntentKind::Comparison => "comparison",
            IntentKind::Trend => "trend",
            IntentKind::Rate => "rate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        IntentKind::ALL.iter().copied().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for IntentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    Temperature,
    Memory,
    Latency,
    Cpu,
    Network,
    Power,
    Utilization,
    Tokens,
    Cache,
    Errors,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentResult {
    pub intent: IntentKind,
    pub measurements: BTreeSet<Measurement>,
    pub domain_terms: BTreeSet<String>,
    pub matched_triggers: Vec<String>,
    /// N from phrases like "top 3"; `None` means the template default.
    pub top_k: Option<usize>,
}

impl IntentResult {
    /// Quantile requested by the question: p50/p90/p99 (or "median")
    /// override the 0.95 default.
    pub fn quantile(&self) -> f64 {
        let has = |t: &str| self.matched_triggers.iter().any(|m| m == t);
        if has("p99") {
            0.99
        } else if has("p90") {
            0.9
        } else if has("p50") || has("median") {
            0.5
        } else {
            0.95
        }
    }
}

#[derive(Deserialize)]
struct RawLexicon {
    precedence: Vec<String>,
    triggers: BTreeMap<String, Vec<String>>,
    measurements: BTreeMap<Measurement, Vec<String>>,
    domain_terms: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct IntentLexicon {
    precedence: Vec<IntentKind>,
    triggers: BTreeMap<IntentKind, Vec<String>>,
    measurements: BTreeMap<Measurement, Vec<String>>,
    domain_terms: BTreeMap<String, Vec<String>>,
}

impl IntentLexicon {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        const FILE: &str = "intent_lexicon.json";
        let raw: RawLexicon = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            file: FILE.into(),
            message: e.to_string(),
        })?;
        let kind = |s: &str| {
            IntentKind::parse(s)
                .ok_or_else(|| ConfigError::Invalid(format!("{FILE}: unknown intent `{s}`")))
        };
        let precedence = raw
            .precedence
            .iter()
            .map(|s| kind(s))
            .collect::<Result<Vec<_>, _>>()?;
        let distinct: BTreeSet<_> = precedence.iter().collect();
        if distinct.len() != IntentKind::ALL.len() || precedence.len() != IntentKind::ALL.len() {
            return Err(ConfigError::Invalid(format!(
                "{FILE}: precedence must list each of the 8 intents once"
            )));
        }
        let norm = |v: Vec<String>| v.iter().map(|s| normalize(s)).collect::<Vec<_>>();
        let mut triggers = BTreeMap::new();
        for (k, v) in raw.triggers {
            triggers.insert(kind(&k)?, norm(v));
        }
        Ok(IntentLexicon {
            precedence,
            triggers,
            measurements: raw
                .measurements
                .into_iter()
                .map(|(k, v)| (k, norm(v)))
                .collect(),
            domain_terms: raw
                .domain_terms
                .into_iter()
                .map(|(k, v)| (k, norm(v)))
                .collect(),
        })
    }

    pub fn builtin() -> Self {
        Self::from_json(crate::config::INTENT_LEXICON_JSON).expect("shipped intent lexicon is valid")
    }

    pub fn triggers(&self, intent: IntentKind) -> &[String] {
        self.triggers.get(&intent).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn precedence(&self) -> &[IntentKind] {
        &self.precedence
    }
}

static TOP_N: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\btop (\d{1,3})\b").unwrap());

pub fn detect_intent(question: &str, lexicon: &IntentLexicon) -> Result<IntentResult, InputError> {
    if question.trim().is_empty() {
        return Err(InputError::EmptyQuestion);
    }
    let q = Normalized::new(question);

    let mut matched_triggers = Vec::new();
    let mut intent = None;
    for kind in &lexicon.precedence {
        let mut hit = false;
        for t in lexicon.triggers(*kind) {
            if q.has(t) {
                hit = true;
                if !matched_triggers.contains(t) {
                    matched_triggers.push(t.clone());
                }
            }
        }
        if hit && intent.is_none() {
            intent = Some(*kind);
        }
    }

    let measurements = lexicon
        .measurements
        .iter()
        .filter(|(_, phrases)| phrases.iter().any(|p| q.has(p)))
        .map(|(m, _)| *m)
        .collect();
    let domain_terms = lexicon
        .domain_terms
        .iter()
        .filter(|(_, phrases)| phrases.iter().any(|p| q.has(p)))
        .map(|(t, _)| t.clone())
        .collect();
    let top_k = TOP_N
        .captures(q.as_str())
        .and_then(|c| c[1].parse::<usize>().ok())
        .filter(|n| *n > 0);

    Ok(IntentResult {
        intent: intent.unwrap_or(IntentKind::CurrentValue),
        measurements,
        domain_terms,
        matched_triggers,
        top_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn detect(q: &str) -> IntentResult {
        detect_intent(q, &IntentLexicon::builtin()).unwrap()
    }

    #[test]
    fn walkthrough_questions() {
        let r = detect("What is the TTFT for my vLLM deployment?");
        assert_eq!(r.intent, IntentKind::CurrentValue);
        assert!(r.domain_terms.contains("ttft") && r.domain_terms.contains("vllm"));
        assert!(r.matched_triggers.contains(&"what is".to_string()));

        let r = detect("How has GPU temperature changed over the last 6 hours?");
        assert_eq!(r.intent, IntentKind::Trend);
        assert!(r.measurements.contains(&Measurement::Temperature));

        let r = detect("Compare token throughput across models since yesterday");
        assert_eq!(r.intent, IntentKind::Comparison);
        assert!(r.matched_triggers.contains(&"throughput".to_string()));
        assert!(r.domain_terms.contains("model"));
    }

    #[test]
    fn table_triggers() {
        let cases = [
            ("how many pods are running", IntentKind::Count),
            ("average memory of nodes", IntentKind::Average),
            ("p99 apiserver latency", IntentKind::Percentile),
            ("top 3 busiest nodes by cpu", IntentKind::TopN),
            ("gpu power versus last week", IntentKind::Comparison),
            ("is disk usage increasing", IntentKind::Trend),
            ("requests per second on ingress", IntentKind::Rate),
            ("current kv cache usage", IntentKind::CurrentValue),
            ("etcd leader", IntentKind::CurrentValue),
        ];
        for (q, want) in cases {
            assert_eq!(detect(q).intent, want, "{q}");
        }
    }

    #[test]
    fn top_k_and_quantile() {
        assert_eq!(detect("top 3 pods by memory").top_k, Some(3));
        assert_eq!(detect("top pods by memory").top_k, None);
        assert_eq!(detect("p99 ttft").quantile(), 0.99);
        assert_eq!(detect("ttft distribution").quantile(), 0.95);
    }

    #[test]
    fn empty_question() {
        assert_eq!(
            detect_intent("   ", &IntentLexicon::builtin()),
            Err(InputError::EmptyQuestion)
        );
    }

    #[test]
    fn case_insensitive() {
        let q = "Compare Token Throughput across models";
        assert_eq!(detect(q), detect(&q.to_uppercase()));
    }
}
