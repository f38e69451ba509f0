use catalogql::catalog::synthetic::full_catalog;
use catalogql::catalog::KeywordRules;
use catalogql::intent::{detect_intent, IntentLexicon};
use catalogql::selector::{candidates, select_best, ScoringConfig};

const Q1: &str = "What is the TTFT for my vLLM deployment?";
const Q2: &str = "How has GPU temperature changed over the last 6 hours?";
const Q3: &str = "Compare token throughput across models since yesterday";

fn pick(q: &str) -> catalogql::selector::ScoredMetric {
    let catalog = full_catalog(&KeywordRules::builtin());
    let intent = detect_intent(q, &IntentLexicon::builtin()).unwrap();
    select_best(q, &intent, &catalog, &ScoringConfig::builtin()).unwrap()
}

#[test]
fn walkthrough_winners() {
    let s = pick(Q1);
    eprintln!("{s:?}");
    assert_eq!(s.entry.name, "vllm:time_to_first_token_seconds");
    assert_eq!(s.s_total, 58);
    let s = pick(Q2);
    eprintln!("{s:?}");
    assert_eq!(s.entry.name, "DCGM_FI_DEV_GPU_TEMP");
    assert_eq!(s.s_total, 63);
    let s = pick(Q3);
    eprintln!("{s:?}");
    assert_eq!(s.entry.name, "vllm:generation_tokens_total");
    assert_eq!(s.s_total, 33);
}

#[test]
fn hinted_candidate_count() {
    let catalog = full_catalog(&KeywordRules::builtin());
    for q in [Q1, Q2, Q3] {
        let (hints, c) = candidates(q, &catalog);
        assert_eq!(hints.len(), 1, "{q}: {hints:?}");
        assert!((30..=80).contains(&c.len()));
    }
    let (hints, c) = candidates("how many things happened", &catalog);
    assert!(hints.is_empty());
    assert_eq!(c.len(), 350);
}
