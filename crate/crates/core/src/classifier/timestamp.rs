//! Partial order over timestamp literals.
//!
//! Values are comparable only inside one family: `xsd:dateTime` with a
//! timezone (compared as instants), `xsd:dateTime` without one, `xsd:date`,
//! or `xsd:integer`/`xsd:decimal`. Anything else, including malformed
//! lexical forms, is incomparable with everything.

use std::cmp::Ordering;
use std::fmt;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};

use crate::model::Term;

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimeFamily {
    Instant,
    LocalDateTime,
    Date,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimestampValue {
    Instant(DateTime<Utc>),
    LocalDateTime(NaiveDateTime),
    Date(NaiveDate),
    Number(Decimal),
}

impl TimestampValue {
    pub fn from_term(term: &Term) -> Option<Self> {
        let Term::Literal(lit) = term else { return None };
        let lex = lit.lexical();
        match lit.datatype().as_str().strip_prefix(XSD)? {
            "dateTime" | "dateTimeStamp" => {
                if let Ok(dt) = DateTime::parse_from_rfc3339(lex) {
                    Some(TimestampValue::Instant(dt.with_timezone(&Utc)))
                } else {
                    NaiveDateTime::parse_from_str(lex, "%Y-%m-%dT%H:%M:%S%.f")
                        .ok()
                        .map(TimestampValue::LocalDateTime)
                }
            }
            "date" => NaiveDate::parse_from_str(lex, "%Y-%m-%d")
                .ok()
                .map(TimestampValue::Date),
            "integer" | "decimal" => Decimal::parse(lex).map(TimestampValue::Number),
            _ => None,
        }
    }

    pub fn family(&self) -> TimeFamily {
        match self {
            TimestampValue::Instant(_) => TimeFamily::Instant,
            TimestampValue::LocalDateTime(_) => TimeFamily::LocalDateTime,
            TimestampValue::Date(_) => TimeFamily::Date,
            TimestampValue::Number(_) => TimeFamily::Number,
        }
    }
}

impl PartialOrd for TimestampValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use TimestampValue::*;
        match (self, other) {
            (Instant(a), Instant(b)) => Some(a.cmp(b)),
            (LocalDateTime(a), LocalDateTime(b)) => Some(a.cmp(b)),
            (Date(a), Date(b)) => Some(a.cmp(b)),
            (Number(a), Number(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl fmt::Display for TimestampValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimestampValue::Instant(v) => write!(f, "{}", v.to_rfc3339()),
            TimestampValue::LocalDateTime(v) => write!(f, "{v}"),
            TimestampValue::Date(v) => write!(f, "{v}"),
            TimestampValue::Number(v) => write!(f, "{v}"),
        }
    }
}

/// Exact decimal number in canonical form: no leading zeros in the
/// integer part, no trailing zeros in the fraction, and no negative zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decimal {
    negative: bool,
    int: String,
    frac: String,
}

impl Decimal {
    pub fn parse(lex: &str) -> Option<Self> {
        let (negative, body) = match lex.as_bytes().first()? {
            b'-' => (true, &lex[1..]),
            b'+' => (false, &lex[1..]),
            _ => (false, lex),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if (int.is_empty() && frac.is_empty()) || !digits(int) || !digits(frac) {
            return None;
        }
        let int = int.trim_start_matches('0').to_owned();
        let frac = frac.trim_end_matches('0').to_owned();
        let negative = negative && !(int.is_empty() && frac.is_empty());
        Some(Decimal { negative, int, frac })
    }

    fn cmp_magnitude(&self, other: &Self) -> Ordering {
        self.int
            .len()
            .cmp(&other.int.len())
            .then_with(|| self.int.cmp(&other.int))
            .then_with(|| self.frac.cmp(&other.frac))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.negative, other.negative) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_magnitude(other),
            (true, true) => other.cmp_magnitude(self),
        }
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        f.write_str(if self.int.is_empty() { "0" } else { &self.int })?;
        if !self.frac.is_empty() {
            write!(f, ".{}", self.frac)?;
        }
        Ok(())
    }
}
