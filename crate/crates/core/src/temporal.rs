//! Resolution of natural-language time expressions into a query window and
//! a PromQL range-selector duration.
//!
//! Strategies run in a fixed order and the first one that recognizes the
//! input wins: caller-supplied timestamps, shorthand durations (`15m`),
//! relative durations (`last 6 hours`), calendar periods (`yesterday`,
//! `this week`, `March 2024`), specific dates (`2024-03-15`, `last tuesday`)
//! and finally the configured default window. `now` is always injected.

use std::fmt;
use std::sync::LazyLock;

use chrono::{DateTime, Datelike, Months, NaiveDate, Utc, Weekday};
use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use crate::error::InputError;

const MINUTE: i64 = 60;
const HOUR: i64 = 3600;
const DAY: i64 = 86_400;
const WEEK: i64 = 7 * DAY;
const MONTH: i64 = 30 * DAY;
const YEAR: i64 = 365 * DAY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Shorthand,
    NlDuration,
    Calendar,
    SpecificDate,
    Explicit,
    Default,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Shorthand => "shorthand",
            Strategy::NlDuration => "nl_duration",
            Strategy::Calendar => "calendar",
            Strategy::SpecificDate => "specific_date",
            Strategy::Explicit => "explicit",
            Strategy::Default => "default",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeRangeInfo {
    pub start: i64,
    pub end: i64,
    pub rate_syntax: String,
    pub duration_text: String,
    pub duration_seconds: i64,
    pub strategy: Strategy,
}

/// How "yesterday" is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YesterdayMode {
    /// The 24 hours ending now.
    #[default]
    Rolling,
    /// The previous UTC calendar day.
    Calendar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalConfig {
    pub default_window: i64,
    pub yesterday: YesterdayMode,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        TemporalConfig {
            default_window: HOUR,
            yesterday: YesterdayMode::Rolling,
        }
    }
}

/// Unit an expression names; decides the unit of its rate syntax.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unit {
    Second,
    Minute,
    Hour,
    Day,
    Week,
    Month,
    Year,
}

impl Unit {
    fn seconds(self) -> i64 {
        match self {
            Unit::Second => 1,
            Unit::Minute => MINUTE,
            Unit::Hour => HOUR,
            Unit::Day => DAY,
            Unit::Week => WEEK,
            Unit::Month => MONTH,
            Unit::Year => YEAR,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Unit::Second => "second",
            Unit::Minute => "minute",
            Unit::Hour => "hour",
            Unit::Day => "day",
            Unit::Week => "week",
            Unit::Month => "month",
            Unit::Year => "year",
        }
    }

    fn parse(word: &str) -> Option<Unit> {
        Some(match word {
            "s" | "sec" | "secs" | "second" | "seconds" => Unit::Second,
            "m" | "min" | "mins" | "minute" | "minutes" => Unit::Minute,
            "h" | "hr" | "hrs" | "hour" | "hours" => Unit::Hour,
            "d" | "day" | "days" => Unit::Day,
            "w" | "wk" | "wks" | "week" | "weeks" => Unit::Week,
            "month" | "months" => Unit::Month,
            "y" | "yr" | "yrs" | "year" | "years" => Unit::Year,
            _ => return None,
        })
    }

    /// Rate syntax for `n` of this unit. Weeks, months and years are
    /// expressed in days.
    fn rate_syntax(self, n: i64) -> String {
        match self {
            Unit::Second => format!("[{n}s]"),
            Unit::Minute => format!("[{n}m]"),
            Unit::Hour => format!("[{n}h]"),
            Unit::Day | Unit::Week | Unit::Month | Unit::Year => {
                format!("[{}d]", n * self.seconds() / DAY)
            }
        }
    }
}

/// Granularity follows the window size: minutes below one hour, hours
/// below 48 hours, days beyond.
pub fn rate_syntax_for(duration: i64) -> Result<String, InputError> {
    if duration <= 0 {
        return Err(InputError::NonPositiveDuration(duration));
    }
    let ceil = |unit: i64| (duration + unit - 1) / unit;
    Ok(if duration < HOUR {
        format!("[{}m]", ceil(MINUTE))
    } else if duration < 48 * HOUR {
        format!("[{}h]", ceil(HOUR))
    } else {
        format!("[{}d]", ceil(DAY))
    })
}

/// Exact human-readable rendering, e.g. "1 hour 30 minutes".
pub fn humanize_duration(seconds: i64) -> String {
    let mut rest = seconds.max(0);
    let mut parts = Vec::new();
    for (unit, name) in [(DAY, "day"), (HOUR, "hour"), (MINUTE, "minute"), (1, "second")] {
        let n = rest / unit;
        rest %= unit;
        if n > 0 {
            parts.push(plural(n, name));
        }
    }
    if parts.is_empty() {
        "0 seconds".into()
    } else {
        parts.join(" ")
    }
}

fn plural(n: i64, word: &str) -> String {
    if n == 1 {
        format!("1 {word}")
    } else {
        format!("{n} {word}s")
    }
}

/// Parse a bare duration such as `1h`, `90s` or `2w` into seconds.
pub fn parse_duration(s: &str) -> Option<i64> {
    let c = SHORTHAND_EXACT.captures(s.trim())?;
    let n: i64 = c[1].parse().ok()?;
    let unit = Unit::parse(&c[2])?;
    (n > 0).then(|| n * unit.seconds())
}

const UNIT_WORDS: &str = r"seconds?|secs?|minutes?|mins?|hours?|hrs?|hr|days?|weeks?|wks?|months?|years?|yrs?";
const NUM_WORDS: &str = r"\d+|an?|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve";

static SHORTHAND_EXACT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d+)(s|m|h|d|w)$").unwrap());
static SHORTHAND: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d+)(s|m|h|d|w)\b").unwrap());
static LAST_N: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"\b(?:over the (?:last|past)|in the (?:last|past)|during the (?:last|past)|for the (?:last|past)|within the (?:last|past)|the (?:last|past)|last|past|previous)(?: ({NUM_WORDS}))? ?({UNIT_WORDS})\b"
    ))
    .unwrap()
});
static N_AGO: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"\b({NUM_WORDS}) ?({UNIT_WORDS}) ago\b")).unwrap()
});
static DAY_WORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\d{1,2}(?:st|nd|rd|th)?$").unwrap());
static ISO_DATE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d{4})-(\d{1,2})-(\d{1,2})\b").unwrap());
static SLASH_DATE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d{1,2})/(\d{1,2})(?:/(\d{2}|\d{4}))?\b").unwrap());
static MONTH_DAY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b([a-z]+) (\d{1,2})(?:st|nd|rd|th)?(?: (\d{4}))?\b").unwrap()
});
static DAY_MONTH: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(\d{1,2})(?:st|nd|rd|th)? (?:of )?([a-z]+)(?: (\d{4}))?\b").unwrap()
});
static WEEKDAY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(last |on |since |past )?(monday|tuesday|wednesday|thursday|friday|saturday|sunday)\b")
        .unwrap()
});

fn parse_count(word: &str) -> Option<i64> {
    Some(match word {
        "a" | "an" | "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        digits => digits.parse().ok()?,
    })
}

fn month_from_word(word: &str) -> Option<u32> {
    Some(match word {
        "january" | "jan" => 1,
        "february" | "feb" => 2,
        "march" | "mar" => 3,
        "april" | "apr" => 4,
        "may" => 5,
        "june" | "jun" => 6,
        "july" | "jul" => 7,
        "august" | "aug" => 8,
        "september" | "sep" | "sept" => 9,
        "october" | "oct" => 10,
        "november" | "nov" => 11,
        "december" | "dec" => 12,
        _ => return None,
    })
}

struct Window {
    start: i64,
    end: i64,
    rate_syntax: String,
    duration_text: String,
}

fn window_ending_now(now: i64, n: i64, unit: Unit) -> Option<Window> {
    let secs = n.checked_mul(unit.seconds())?;
    (n > 0).then(|| Window {
        start: now - secs,
        end: now,
        rate_syntax: unit.rate_syntax(n),
        duration_text: plural(n, unit.name()),
    })
}

/// Day-unit window: rate syntax counts (partial) days.
fn day_window(start: i64, end: i64) -> Option<Window> {
    (start < end).then(|| {
        let d = end - start;
        Window {
            start,
            end,
            rate_syntax: format!("[{}d]", (d + DAY - 1) / DAY),
            duration_text: humanize_duration(d),
        }
    })
}

fn midnight(date: NaiveDate) -> i64 {
    date.and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
        .timestamp()
}

fn shorthand(q: &str, now: i64) -> Option<Window> {
    let c = SHORTHAND.captures(q)?;
    let n: i64 = c[1].parse().ok()?;
    let unit = Unit::parse(&c[2])?;
    window_ending_now(now, n, unit)
}

fn nl_duration(q: &str, now: i64) -> Option<Window> {
    let from = |c: Captures<'_>| {
        let n = c.get(1).map_or(Some(1), |m| parse_count(m.as_str()))?;
        window_ending_now(now, n, Unit::parse(&c[2])?)
    };
    // Take whichever phrase appears first in the question.
    let a = LAST_N.captures(q);
    let b = N_AGO.captures(q);
    match (a, b) {
        (Some(a), Some(b)) if b.get(0)?.start() < a.get(0)?.start() => from(b),
        (Some(a), _) => from(a),
        (None, Some(b)) => from(b),
        (None, None) => None,
    }
}

fn has_word(q: &str, w: &str) -> bool {
    q.split(' ').any(|t| t == w)
}

fn preceded_by(q: &str, at: usize, word: &str) -> bool {
    q[..at].trim_end().rsplit(' ').next() == Some(word)
}

fn calendar(q: &str, now: i64, today: NaiveDate, cfg: &TemporalConfig) -> Option<Window> {
    let today_start = midnight(today);
    if let Some(at) = q.find("yesterday").filter(|_| has_word(q, "yesterday")) {
        return match cfg.yesterday {
            YesterdayMode::Rolling => Some(Window {
                start: now - DAY,
                end: now,
                rate_syntax: "[1d]".into(),
                duration_text: "1 day".into(),
            }),
            YesterdayMode::Calendar => {
                let end = if preceded_by(q, at, "since") { now } else { today_start };
                day_window(today_start - DAY, end)
            }
        };
    }
    if has_word(q, "today") {
        return day_window(today_start, now);
    }
    if q.contains("this week") {
        let monday = today - chrono::Days::new(today.weekday().num_days_from_monday() as u64);
        return day_window(midnight(monday), now);
    }
    if q.contains("this month") {
        return day_window(midnight(today.with_day(1)?), now);
    }
    if q.contains("this year") {
        return day_window(midnight(NaiveDate::from_ymd_opt(today.year(), 1, 1)?), now);
    }
    month_name(q, now, today)
}

fn is_day(word: &str) -> bool {
    DAY_WORD.is_match(word)
}

/// "March", "in march 2024", "since feb". A month followed by a day number
/// is left to the specific-date strategy. "may" and "march" double as
/// ordinary words, so they need a year or a leading preposition.
fn month_name(q: &str, now: i64, today: NaiveDate) -> Option<Window> {
    let words: Vec<&str> = q.split(' ').collect();
    for (i, w) in words.iter().enumerate() {
        let Some(month) = month_from_word(w) else {
            continue;
        };
        let next = words.get(i + 1).copied().unwrap_or("");
        let prev = if i > 0 { words[i - 1] } else { "" };
        let year: Option<i32> = (next.len() == 4).then(|| next.parse().ok()).flatten();
        let day_before = is_day(prev) || (prev == "of" && i >= 2 && is_day(words[i - 2]));
        if (year.is_none() && is_day(next)) || day_before {
            continue;
        }
        let with_preposition = matches!(prev, "in" | "during" | "since" | "for" | "of" | "throughout");
        if matches!(*w, "may" | "march" | "mar") && year.is_none() && !with_preposition {
            continue;
        }
        let year = year.unwrap_or(if month <= today.month() {
            today.year()
        } else {
            today.year() - 1
        });
        let first = NaiveDate::from_ymd_opt(year, month, 1)?;
        let start = midnight(first);
        let end = if prev == "since" {
            now
        } else {
            midnight(first.checked_add_months(Months::new(1))?).min(now)
        };
        if let Some(w) = day_window(start, end) {
            return Some(w);
        }
    }
    None
}

/// Most recent occurrence of month/day on or before today.
fn past_date(today: NaiveDate, month: u32, day: u32) -> Option<NaiveDate> {
    // Validate against a leap year so Feb 29 is accepted.
    NaiveDate::from_ymd_opt(2000, month, day)?;
    let mut year = today.year();
    loop {
        match NaiveDate::from_ymd_opt(year, month, day) {
            Some(d) if d <= today => return Some(d),
            _ => year -= 1,
        }
        if year < today.year() - 8 {
            return None;
        }
    }
}

fn specific_date(q: &str, now: i64, today: NaiveDate) -> Option<Window> {
    let day_range = |date: NaiveDate, since: bool| {
        let start = midnight(date);
        let end = if since { now } else { (start + DAY).min(now) };
        day_window(start, end)
    };
    let since_at = |at: usize| preceded_by(q, at, "since");

    if let Some(c) = ISO_DATE.captures(q) {
        let at = c.get(0)?.start();
        if let Some(d) = NaiveDate::from_ymd_opt(c[1].parse().ok()?, c[2].parse().ok()?, c[3].parse().ok()?) {
            if let Some(w) = day_range(d, since_at(at)) {
                return Some(w);
            }
        }
    }
    for c in MONTH_DAY.captures_iter(q) {
        let Some(month) = month_from_word(&c[1]) else {
            continue;
        };
        let day: u32 = c[2].parse().ok()?;
        let date = match c.get(3) {
            Some(y) => NaiveDate::from_ymd_opt(y.as_str().parse().ok()?, month, day),
            None => past_date(today, month, day),
        };
        if let Some(w) = date.and_then(|d| day_range(d, since_at(c.get(0)?.start()))) {
            return Some(w);
        }
    }
    for c in DAY_MONTH.captures_iter(q) {
        let Some(month) = month_from_word(&c[2]) else {
            continue;
        };
        let day: u32 = c[1].parse().ok()?;
        let date = match c.get(3) {
            Some(y) => NaiveDate::from_ymd_opt(y.as_str().parse().ok()?, month, day),
            None => past_date(today, month, day),
        };
        if let Some(w) = date.and_then(|d| day_range(d, since_at(c.get(0)?.start()))) {
            return Some(w);
        }
    }
    if let Some(c) = SLASH_DATE.captures(q) {
        let month: u32 = c[1].parse().ok()?;
        let day: u32 = c[2].parse().ok()?;
        let date = match c.get(3) {
            Some(y) => {
                let y: i32 = y.as_str().parse().ok()?;
                let y = if y < 100 { 2000 + y } else { y };
                NaiveDate::from_ymd_opt(y, month, day)
            }
            None => past_date(today, month, day),
        };
        if let Some(w) = date.and_then(|d| day_range(d, since_at(c.get(0)?.start()))) {
            return Some(w);
        }
    }
    if let Some(c) = WEEKDAY.captures(q) {
        let target: Weekday = c[2].parse().ok()?;
        let modifier = c.get(1).map(|m| m.as_str().trim());
        let mut back = (7 + today.weekday().num_days_from_monday() as i64
            - target.num_days_from_monday() as i64)
            % 7;
        if back == 0 && matches!(modifier, Some("last") | Some("past")) {
            back = 7;
        }
        let date = today - chrono::Days::new(back as u64);
        return day_range(date, modifier == Some("since"));
    }
    None
}

/// Lowercased words, keeping the `-`, `/` and `:` that dates and
/// durations use.
fn time_text(question: &str) -> String {
    let mapped: String = question
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| *c != '\'' && *c != '\u{2019}')
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '/' | ':') { c } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Resolve the time window for a question.
pub fn resolve_time(
    question: &str,
    explicit: Option<(i64, i64)>,
    now: i64,
    cfg: &TemporalConfig,
) -> Result<TimeRangeInfo, InputError> {
    if let Some((start, end)) = explicit {
        if start >= end {
            return Err(InputError::InvertedRange { start, end });
        }
        let d = end - start;
        return Ok(TimeRangeInfo {
            start,
            end,
            rate_syntax: rate_syntax_for(d)?,
            duration_text: humanize_duration(d),
            duration_seconds: d,
            strategy: Strategy::Explicit,
        });
    }
    if cfg.default_window <= 0 {
        return Err(InputError::NonPositiveDuration(cfg.default_window));
    }

    let q = time_text(question);
    let today = DateTime::<Utc>::from_timestamp(now, 0)
        .map(|t| t.date_naive())
        .unwrap_or_default();

    let found = shorthand(&q, now)
        .map(|w| (w, Strategy::Shorthand))
        .or_else(|| nl_duration(&q, now).map(|w| (w, Strategy::NlDuration)))
        .or_else(|| calendar(&q, now, today, cfg).map(|w| (w, Strategy::Calendar)))
        .or_else(|| specific_date(&q, now, today).map(|w| (w, Strategy::SpecificDate)));

    let (w, strategy) = match found {
        Some(x) => x,
        None => (
            Window {
                start: now - cfg.default_window,
                end: now,
                rate_syntax: rate_syntax_for(cfg.default_window)?,
                duration_text: humanize_duration(cfg.default_window),
            },
            Strategy::Default,
        ),
    };
    Ok(TimeRangeInfo {
        duration_seconds: w.end - w.start,
        start: w.start,
        end: w.end,
        rate_syntax: w.rate_syntax,
        duration_text: w.duration_text,
        strategy,
    })
}
