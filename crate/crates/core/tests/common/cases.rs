//! Fixed instant, walkthrough questions and the temporal expression table.

use catalogql::temporal::Strategy;

/// Monday 2024-06-10 06:13:20 UTC.
pub const NOW: i64 = 1_718_000_000;
/// Seconds since midnight at `NOW`.
pub const INTO_DAY: i64 = 6 * 3600 + 13 * 60 + 20;
pub const DAY: i64 = 86_400;

pub const Q1: &str = "What is the TTFT for my vLLM deployment?";
pub const Q2: &str = "How has GPU temperature changed over the last 6 hours?";
pub const Q3: &str = "Compare token throughput across models since yesterday";
pub const A1: &str = "histogram_quantile(0.95, sum(rate(vllm:time_to_first_token_seconds_bucket[1h])) by (le))";
pub const A2: &str = "avg_over_time(DCGM_FI_DEV_GPU_TEMP[6h])";
pub const A3: &str = "sum by (model_name)(rate(vllm:generation_tokens_total[1d]))";

use Strategy::*;

/// (expression, duration seconds, rate syntax, strategy) at `NOW`.
pub const TEMPORAL_CASES: &[(&str, i64, &str, Strategy)] = &[
    ("", 3600, "[1h]", Default),
    ("what is the cpu usage", 3600, "[1h]", Default),
    ("errors around christmas", 3600, "[1h]", Default),
    ("errors on february 30", 3600, "[1h]", Default),
    ("7d", 7 * DAY, "[7d]", Shorthand),
    ("15m", 900, "[15m]", Shorthand),
    ("1h", 3600, "[1h]", Shorthand),
    ("2w", 14 * DAY, "[14d]", Shorthand),
    ("errors in the past 30s", 30, "[30s]", Shorthand),
    ("compare 5m and yesterday", 300, "[5m]", Shorthand),
    ("last 6 hours", 6 * 3600, "[6h]", NlDuration),
    ("last 30 minutes", 1800, "[30m]", NlDuration),
    ("last 100 minutes", 6000, "[100m]", NlDuration),
    ("past 2 days", 2 * DAY, "[2d]", NlDuration),
    ("over the last week", 7 * DAY, "[7d]", NlDuration),
    ("in the past month", 30 * DAY, "[30d]", NlDuration),
    ("last year", 365 * DAY, "[365d]", NlDuration),
    ("3 hours ago", 3 * 3600, "[3h]", NlDuration),
    ("in the last two hours", 7200, "[2h]", NlDuration),
    ("over the last 90 seconds", 90, "[90s]", NlDuration),
    ("over the past an hour", 3600, "[1h]", NlDuration),
    ("yesterday over the last 2 hours", 7200, "[2h]", NlDuration),
    ("yesterday", DAY, "[1d]", Calendar),
    ("since yesterday", DAY, "[1d]", Calendar),
    ("today", INTO_DAY, "[1d]", Calendar),
    ("this week", INTO_DAY, "[1d]", Calendar),
    ("this month", 9 * DAY + INTO_DAY, "[10d]", Calendar),
    ("in May", 31 * DAY, "[31d]", Calendar),
    ("March 2024", 31 * DAY, "[31d]", Calendar),
    ("since March", 101 * DAY + INTO_DAY, "[102d]", Calendar),
    ("during feb", 29 * DAY, "[29d]", Calendar),
    ("2024-06-01", DAY, "[1d]", SpecificDate),
    ("on March 15", DAY, "[1d]", SpecificDate),
    ("15 march 2024", DAY, "[1d]", SpecificDate),
    ("the 4th of june", DAY, "[1d]", SpecificDate),
    ("6/1", DAY, "[1d]", SpecificDate),
    ("last tuesday", DAY, "[1d]", SpecificDate),
    ("on monday", INTO_DAY, "[1d]", SpecificDate),
    ("last monday", DAY, "[1d]", SpecificDate),
];
