//! Rule value model: strings, exact numbers, booleans, times and time ranges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;

/// A time of day with minute or second precision,. Stored as seconds from
/// midnight, always less than 86400.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeOfDay {
    secs: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimeParseError {
    #[error("malformed time literal {0:?}, expected HH:MM or HH:MM:SS")]
    Malformed(String),
    #[error("time component out of range in {0:?} (hours 0-23, minutes/seconds 0-59)")]
    OutOfRange(String),
}

impl TimeOfDay {
    pub fn new(hours: u32, minutes: u32, seconds: u32) -> Option<Self> {
        if hours > 23 || minutes > 59 || seconds > 59 {
            return None;
        }
        Some(TimeOfDay { secs: hours * 3600 + minutes * 60 + seconds })
    }

    pub fn from_seconds(secs: u32) -> Option<Self> {
        if secs < 86400 {
            Some(TimeOfDay { secs })
        } else {
            None
        }
    }

    pub fn seconds(&self) -> u32 {
        self.secs
    }

    pub fn checked_add(&self, delta_secs: i64) -> Option<TimeOfDay> {
        let v = self.secs as i64 + delta_secs;
        if (0..86400).contains(&v) {
            Some(TimeOfDay { secs: v as u32 })
        } else {
            None
        }
    }
}

impl FromStr for TimeOfDay {
    type Err = TimeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(TimeParseError::Malformed(s.to_string()));
        }
        let mut nums = [0u32; 3];
        for (i, p) in parts.iter().enumerate() {
            if p.is_empty() || p.len() > 2 || !p.chars().all(|c| c.is_ascii_digit()) {
                return Err(TimeParseError::Malformed(s.to_string()));
            }
            nums[i] = p.parse().map_err(|_| TimeParseError::Malformed(s.to_string()))?;
        }
        TimeOfDay::new(nums[0], nums[1], nums[2]).ok_or_else(|| TimeParseError::OutOfRange(s.to_string()))
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.secs / 3600;
        let m = (self.secs % 3600) / 60;
        let s = self.secs % 60;
        if s == 0 {
            write!(f, "{h:02}:{m:02}")
        } else {
            write!(f, "{h:02}:{m:02}:{s:02}")
        }
    }
}

/// Half-open in spirit but inclusive at both ends for matching purposes:
/// `start <= t <= end`, with `start < end` within one day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: TimeOfDay,
    pub end: TimeOfDay,
}

impl TimeRange {
    pub fn new(start: TimeOfDay, end: TimeOfDay) -> Option<Self> {
        if start < end {
            Some(TimeRange { start, end })
        } else {
            None
        }
    }

    pub fn contains(&self, t: TimeOfDay) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn midpoint(&self) -> TimeOfDay {
        let mid = (self.start.seconds() + self.end.seconds()) / 2;
        // Snap to the minute grid, staying inside the range.
        let snapped = mid - mid % 60;
        let snapped = snapped.max(self.start.seconds());
        TimeOfDay::from_seconds(snapped).expect("midpoint within day")
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// A concrete value appearing on the right side of a clause.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    /// Free text; rendered bare when identifier-shaped, quoted otherwise.
    Str(String),
    Num(Decimal),
    Bool(bool),
    Time(TimeOfDay),
    TimeRange(TimeRange),
    /// Ordered, pairwise non-overlapping ranges.
    TimeRangeSet(Vec<TimeRange>),
    /// Bracketed list of strings, used with the `in` comparator.
    StrList(Vec<String>),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Str(_) => "string",
            Value::Num(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Time(_) => "time",
            Value::TimeRange(_) => "time-range",
            Value::TimeRangeSet(_) => "time-range-set",
            Value::StrList(_) => "string-list",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Num(_))
    }

    /// The text a determinism check inspects: the value as a human would
    /// read it, unquoted.
    pub fn raw_text(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            other => other.to_string(),
        }
    }
}

fn is_bare_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => {
                // Keywords must be quoted or they would re-lex as operators.
                let lower = s.to_ascii_lowercase();
                let is_keyword = matches!(
                    lower.as_str(),
                    "if" | "then" | "and" | "or" | "not" | "in" | "rule" | "true" | "false"
                );
                if is_bare_identifier(s) && !is_keyword {
                    write!(f, "{s}")
                } else {
                    write!(f, "\"{s}\"")
                }
            }
            Value::Num(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Time(t) => write!(f, "{t}"),
            Value::TimeRange(r) => write!(f, "{}-{}", r.start, r.end),
            Value::TimeRangeSet(ranges) => {
                write!(f, "[")?;
                for (i, r) in ranges.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}-{}", r.start, r.end)?;
                }
                write!(f, "]")
            }
            Value::StrList(items) => {
                write!(f, "[")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    if is_bare_identifier(s) {
                        write!(f, "{s}")?;
                    } else {
                        write!(f, "\"{s}\"")?;
                    }
                }
                write!(f, "]")
            }
        }
    }
}

/// JSON form used in emitted test suites: numbers as JSON numbers, booleans
/// as booleans, everything else as its canonical text.
impl Value {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Num(n) => serde_json::Number::from_str(&n.to_string())
                .map(serde_json::Value::Number)
                .unwrap_or_else(|_| serde_json::Value::String(n.to_string())),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Str(s) => serde_json::Value::String(s.clone()),
            other => serde_json::Value::String(other.to_string()),
        }
    }
}

/// Sort + verify pairwise non-overlap. Returns `Err` with the first pair of
/// overlapping ranges (by canonical order).
pub fn normalize_ranges(mut ranges: Vec<TimeRange>) -> Result<Vec<TimeRange>, (TimeRange, TimeRange)> {
    ranges.sort();
    for w in ranges.windows(2) {
        if w[1].start <= w[0].end {
            return Err((w[0], w[1]));
        }
    }
    Ok(ranges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_parse_and_render() {
        let t: TimeOfDay = "09:30".parse().unwrap();
        assert_eq!(t.to_string(), "09:30");
        let t: TimeOfDay = "9:30:05".parse().unwrap();
        assert_eq!(t.to_string(), "09:30:05");
        assert!("24:00".parse::<TimeOfDay>().is_err());
        assert!("12:60".parse::<TimeOfDay>().is_err());
        assert!("12".parse::<TimeOfDay>().is_err());
    }

    #[test]
    fn range_requires_start_before_end() {
        let a: TimeOfDay = "09:00".parse().unwrap();
        let b: TimeOfDay = "10:00".parse().unwrap();
        assert!(TimeRange::new(a, b).is_some());
        assert!(TimeRange::new(b, a).is_none());
        assert!(TimeRange::new(a, a).is_none());
    }

    #[test]
    fn overlapping_ranges_rejected() {
        let r = |a: &str, b: &str| TimeRange::new(a.parse().unwrap(), b.parse().unwrap()).unwrap();
        assert!(normalize_ranges(vec![r("10:00", "12:00"), r("13:00", "14:00")]).is_ok());
        assert!(normalize_ranges(vec![r("10:00", "12:00"), r("11:00", "13:00")]).is_err());
        // Sorting happens before the overlap check.
        let sorted = normalize_ranges(vec![r("13:00", "14:00"), r("10:00", "12:00")]).unwrap();
        assert_eq!(sorted[0].start.to_string(), "10:00");
    }

    #[test]
    fn value_rendering() {
        assert_eq!(Value::Str("Success".into()).to_string(), "Success");
        assert_eq!(Value::Str("core session".into()).to_string(), "\"core session\"");
        assert_eq!(Value::Str("or".into()).to_string(), "\"or\"");
        assert_eq!(Value::Num("100000".parse().unwrap()).to_string(), "100000");
        assert_eq!(Value::Bool(true).to_string(), "true");
        let r = TimeRange::new("10:00".parse().unwrap(), "12:00".parse().unwrap()).unwrap();
        assert_eq!(Value::TimeRangeSet(vec![r]).to_string(), "[10:00-12:00]");
    }
}
