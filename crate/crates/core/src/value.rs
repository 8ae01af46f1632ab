//! Typed cell values and the text-to-value inference rules.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::SheetError;

/// A validated ISO-8601 calendar date (`YYYY-MM-DD`).
///
/// Stored as text: lexicographic order of the canonical form coincides with
/// chronological order, so no datetime arithmetic is needed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Date(String);

impl Date {
    pub fn parse(text: &str) -> Option<Date> {
        let b = text.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return None;
        }
        let digits = |s: &[u8]| -> Option<u32> {
            s.iter().try_fold(0u32, |acc, &c| {
                c.is_ascii_digit().then(|| acc * 10 + u32::from(c - b'0'))
            })
        };
        let year = digits(&b[0..4])?;
        let month = digits(&b[5..7])?;
        let day = digits(&b[8..10])?;
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return None;
        }
        Some(Date(text.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Date::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid date {s:?}")))
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_leap(year: u32) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

/// The content of a single cell.
///
/// `Number` is always finite and `Formula` source always begins with `=`;
/// [`CellValue::validate`] checks both and the workbook refuses to store
/// values that fail it. Formulas are kept verbatim and never evaluated.
#[derive(Debug, Clone, Default)]
pub enum CellValue {
    #[default]
    Empty,
    Text(String),
    Number(f64),
    Bool(bool),
    Date(Date),
    Formula(String),
}

impl CellValue {
    /// Classifies user-entered text. Rules are tried in order: empty string,
    /// `=` prefix, ISO date, `true`/`false` (any case), decimal number, text.
    pub fn infer(text: &str) -> CellValue {
        if text.is_empty() {
            CellValue::Empty
        } else if text.starts_with('=') {
            CellValue::Formula(text.to_string())
        } else if let Some(d) = Date::parse(text) {
            CellValue::Date(d)
        } else if text.eq_ignore_ascii_case("true") {
            CellValue::Bool(true)
        } else if text.eq_ignore_ascii_case("false") {
            CellValue::Bool(false)
        } else if let Some(n) = parse_decimal(text) {
            CellValue::Number(n)
        } else {
            CellValue::Text(text.to_string())
        }
    }

    /// Applies the leading-`=` rule to text written into a cell.
    pub fn normalized(self) -> CellValue {
        match self {
            CellValue::Text(s) if s.starts_with('=') => CellValue::Formula(s),
            CellValue::Text(s) if s.is_empty() => CellValue::Empty,
            other => other,
        }
    }

    pub fn validate(&self) -> Result<(), SheetError> {
        match self {
            CellValue::Number(n) if !n.is_finite() => {
                Err(SheetError::InvalidValue(format!("non-finite number {n}")))
            }
            CellValue::Formula(s) if !s.starts_with('=') => Err(SheetError::InvalidValue(
                format!("formula source must start with '=': {s:?}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }

    /// One-letter tag used by the workbook JSON format and sheet context.
    pub fn type_tag(&self) -> &'static str {
        match self {
            CellValue::Empty => "e",
            CellValue::Text(_) => "s",
            CellValue::Number(_) => "n",
            CellValue::Bool(_) => "b",
            CellValue::Date(_) => "d",
            CellValue::Formula(_) => "f",
        }
    }

    /// Textual rendering used by regex conditions, CSV export and prompts.
    pub fn render(&self) -> String {
        match self {
            CellValue::Empty => String::new(),
            CellValue::Text(s) | CellValue::Formula(s) => s.clone(),
            CellValue::Number(n) => format_number(*n),
            CellValue::Bool(true) => "TRUE".to_string(),
            CellValue::Bool(false) => "FALSE".to_string(),
            CellValue::Date(d) => d.0.clone(),
        }
    }

    fn sort_rank(&self) -> u8 {
        match self {
            CellValue::Number(_) => 0,
            CellValue::Date(_) => 1,
            CellValue::Text(_) => 2,
            CellValue::Bool(_) => 3,
            CellValue::Formula(_) => 4,
            CellValue::Empty => 5,
        }
    }

    /// Total order used by SORT: numbers, dates, text, booleans, formulas,
    /// then empties. Within a type the natural order applies.
    pub fn sort_cmp(&self, other: &CellValue) -> Ordering {
        match (self, other) {
            (CellValue::Number(a), CellValue::Number(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            (CellValue::Date(a), CellValue::Date(b)) => a.cmp(b),
            (CellValue::Text(a), CellValue::Text(b)) => a.cmp(b),
            (CellValue::Bool(a), CellValue::Bool(b)) => a.cmp(b),
            (CellValue::Formula(a), CellValue::Formula(b)) => a.cmp(b),
            _ => self.sort_rank().cmp(&other.sort_rank()),
        }
    }
}

/// Renders a finite number in its shortest round-tripping decimal form.
pub fn format_number(n: f64) -> String {
    if n == 0.0 {
        // collapse -0
        return "0".to_string();
    }
    format!("{n}")
}

/// Parses a plain decimal literal. Rejects `inf`, `NaN` and other forms
/// `f64::from_str` accepts that are not decimal notation.
pub fn parse_decimal(text: &str) -> Option<f64> {
    let body = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let mut parts = mantissa.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next().unwrap_or("");
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if let Some(exp) = exponent {
        let digits = exp.strip_prefix(['+', '-']).unwrap_or(exp);
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
    }
    text.parse::<f64>().ok().filter(|n| n.is_finite())
}

impl PartialEq for CellValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (CellValue::Empty, CellValue::Empty) => true,
            (CellValue::Text(a), CellValue::Text(b)) => a == b,
            (CellValue::Number(a), CellValue::Number(b)) => a == b,
            (CellValue::Bool(a), CellValue::Bool(b)) => a == b,
            (CellValue::Date(a), CellValue::Date(b)) => a == b,
            (CellValue::Formula(a), CellValue::Formula(b)) => a == b,
            _ => false,
        }
    }
}

// Stored numbers are finite, so equality is reflexive.
impl Eq for CellValue {}

impl Hash for CellValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            CellValue::Empty => {}
            CellValue::Text(s) | CellValue::Formula(s) => s.hash(state),
            CellValue::Number(n) => {
                let n = if *n == 0.0 { 0.0f64 } else { *n };
                n.to_bits().hash(state)
            }
            CellValue::Bool(b) => b.hash(state),
            CellValue::Date(d) => d.hash(state),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Wire form `{"t": "n|s|b|d|f|e", "v": ...}`.
#[derive(Serialize, Deserialize)]
struct TaggedValue {
    t: String,
    #[serde(default)]
    v: serde_json::Value,
}

impl Serialize for CellValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde_json::Value;
        let v = match self {
            CellValue::Empty => Value::Null,
            CellValue::Text(x) | CellValue::Formula(x) => Value::String(x.clone()),
            CellValue::Number(n) => serde_json::Number::from_f64(*n)
                .map(Value::Number)
                .ok_or_else(|| serde::ser::Error::custom("non-finite number"))?,
            CellValue::Bool(b) => Value::Bool(*b),
            CellValue::Date(d) => Value::String(d.0.clone()),
        };
        TaggedValue {
            t: self.type_tag().to_string(),
            v,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CellValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        use serde_json::Value;
        let tv = TaggedValue::deserialize(d)?;
        let value = match (tv.t.as_str(), tv.v) {
            ("e", _) => CellValue::Empty,
            ("s", Value::String(s)) => CellValue::Text(s),
            ("f", Value::String(s)) => CellValue::Formula(s),
            ("n", Value::Number(n)) => {
                CellValue::Number(n.as_f64().ok_or_else(|| D::Error::custom("bad number"))?)
            }
            ("b", Value::Bool(b)) => CellValue::Bool(b),
            ("d", Value::String(s)) => CellValue::Date(
                Date::parse(&s).ok_or_else(|| D::Error::custom(format!("invalid date {s:?}")))?,
            ),
            (t, v) => return Err(D::Error::custom(format!("bad cell value t={t:?} v={v}"))),
        };
        value.validate().map_err(D::Error::custom)?;
        Ok(value)
    }
}
