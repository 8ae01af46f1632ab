//! A1-style cell addresses and ranges.

use std::cmp::Ordering;
use std::fmt;


use crate::error::SheetError;

/// Largest row index a sheet may use.
pub const MAX_ROWS: u32 = 10_000;
/// Largest column index a sheet may use (column `ALL`).
pub const MAX_COLS: u32 = 1_000;

const MAX_COL_LETTERS: usize = 6;
const MAX_ROW_DIGITS: usize = 9;

/// 1-based (column, row) coordinate. Orders row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellAddress {
    pub col: u32,
    pub row: u32,
}

impl CellAddress {
    pub fn new(col: u32, row: u32) -> Self {
        debug_assert!(col >= 1 && row >= 1);
        CellAddress { col, row }
    }

    pub fn parse(text: &str) -> Result<CellAddress, SheetError> {
        let (col, rest) = split_column(text)?;
        if rest.is_empty() {
            return Err(bad(text, "missing row number"));
        }
        let row = parse_row(rest, text)?;
        Ok(CellAddress { col, row })
    }

    pub fn in_bounds(&self) -> bool {
        self.col <= MAX_COLS && self.row <= MAX_ROWS
    }
}

impl Ord for CellAddress {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.row, self.col).cmp(&(other.row, other.col))
    }
}

impl PartialOrd for CellAddress {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl serde::Serialize for CellAddress {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for CellAddress {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        CellAddress::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", column_letters(self.col), self.row)
    }
}

/// Converts a 1-based column index to letters (1 → `A`, 27 → `AA`).
pub fn column_letters(mut col: u32) -> String {
    let mut out = Vec::new();
    while col > 0 {
        let rem = (col - 1) % 26;
        out.push(b'A' + rem as u8);
        col = (col - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Parses column letters (case-sensitive uppercase) into a 1-based index.
pub fn parse_column(letters: &str) -> Option<u32> {
    if letters.is_empty()
        || letters.len() > MAX_COL_LETTERS
        || !letters.bytes().all(|c| c.is_ascii_uppercase())
    {
        return None;
    }
    Some(
        letters
            .bytes()
            .fold(0u32, |acc, c| acc * 26 + u32::from(c - b'A') + 1),
    )
}

fn bad(token: &str, reason: &str) -> SheetError {
    SheetError::BadRange {
        token: token.to_string(),
        reason: reason.to_string(),
    }
}

fn split_column(text: &str) -> Result<(u32, &str), SheetError> {
    let n = text
        .bytes()
        .take_while(|c| c.is_ascii_alphabetic())
        .count();
    let letters = &text[..n];
    if letters.is_empty() {
        return Err(bad(text, "expected column letters"));
    }
    if letters.bytes().any(|c| c.is_ascii_lowercase()) {
        return Err(bad(letters, "column letters must be uppercase"));
    }
    let col = parse_column(letters).ok_or_else(|| bad(letters, "column out of range"))?;
    Ok((col, &text[n..]))
}

fn parse_row(digits: &str, token: &str) -> Result<u32, SheetError> {
    if !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad(token, "bad row number"));
    }
    if digits.starts_with('0') {
        return Err(bad(token, "row numbers start at 1 and have no leading zeros"));
    }
    if digits.len() > MAX_ROW_DIGITS {
        return Err(bad(token, "row out of range"));
    }
    digits.parse().map_err(|_| bad(token, "bad row number"))
}

/// A rectangular block of cells, optionally sheet-qualified.
///
/// `end_row == None` marks an open-bottom range (`E:E`, `E2:E`) that extends
/// to the last used row of its sheet when resolved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Range {
    pub sheet: Option<String>,
    pub start: CellAddress,
    pub end_col: u32,
    pub end_row: Option<u32>,
}

impl Range {
    pub fn cell(addr: CellAddress) -> Range {
        Range {
            sheet: None,
            start: addr,
            end_col: addr.col,
            end_row: Some(addr.row),
        }
    }

    pub fn rect(start: CellAddress, end: CellAddress) -> Range {
        Range {
            sheet: None,
            start,
            end_col: end.col,
            end_row: Some(end.row),
        }
    }

    /// Whole-column range `first:last` starting at `from_row`.
    pub fn columns(first: u32, last: u32, from_row: u32) -> Range {
        Range {
            sheet: None,
            start: CellAddress::new(first, from_row),
            end_col: last,
            end_row: None,
        }
    }

    pub fn on_sheet(mut self, sheet: impl Into<String>) -> Range {
        self.sheet = Some(sheet.into());
        self
    }

    pub fn is_open_bottom(&self) -> bool {
        self.end_row.is_none()
    }

    pub fn is_single_cell(&self) -> bool {
        self.end_col == self.start.col && self.end_row == Some(self.start.row)
    }

    pub fn width(&self) -> u32 {
        self.end_col - self.start.col + 1
    }

    /// Whole columns from row 1 downwards, e.g. `B:C`.
    pub fn is_whole_columns(&self) -> bool {
        self.end_row.is_none() && self.start.row == 1
    }

    /// Row span after resolving an open bottom against `used_rows`.
    /// `None` when the resolved range contains no rows.
    pub fn row_span(&self, used_rows: u32) -> Option<(u32, u32)> {
        let last = self.end_row.unwrap_or(used_rows);
        (last >= self.start.row).then_some((self.start.row, last))
    }

    /// Whether every cell a closed range names lies inside the grid.
    pub fn in_bounds(&self) -> bool {
        self.start.in_bounds()
            && self.end_col <= MAX_COLS
            && self.end_row.is_none_or(|r| r <= MAX_ROWS)
    }

    fn check(&self, token: &str) -> Result<(), SheetError> {
        if self.end_col < self.start.col {
            return Err(bad(token, "reversed corners"));
        }
        if matches!(self.end_row, Some(r) if r < self.start.row) {
            return Err(bad(token, "reversed corners"));
        }
        if let Some(name) = &self.sheet {
            check_sheet_name(name).map_err(|_| bad(name, "invalid sheet name"))?;
        }
        Ok(())
    }
}

/// Validates the sheet-name invariant: nonempty, no `!` or `:`.
pub fn check_sheet_name(name: &str) -> Result<(), SheetError> {
    if name.is_empty() || name.contains(['!', ':']) {
        return Err(SheetError::InvalidSheetName(name.to_string()));
    }
    Ok(())
}

/// Whether a sheet name can be written without quotes.
pub fn is_bare_sheet_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn quote_sheet_name(name: &str) -> String {
    if is_bare_sheet_name(name) {
        name.to_string()
    } else {
        format!("'{}'", name.replace('\'', "''"))
    }
}

/// Parses A1 text: `E2`, `B2:C4`, `E:E`, `E2:E`, optionally prefixed by
/// `Sheet!` or `'Quoted name'!`.
pub fn parse_range(text: &str) -> Result<Range, SheetError> {
    if text.is_empty() {
        return Err(bad(text, "empty range"));
    }
    let (sheet, body) = split_sheet(text)?;
    let (first, second) = match body.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (body, None),
    };
    let (start_col, start_rest) = split_column(first)?;
    let start_row = if start_rest.is_empty() {
        None
    } else {
        Some(parse_row(start_rest, first)?)
    };

    let range = match (start_row, second) {
        (Some(row), None) => Range::cell(CellAddress::new(start_col, row)),
        (None, None) => return Err(bad(first, "missing row number")),
        (start_row, Some(second)) => {
            let (end_col, end_rest) = split_column(second)?;
            let end_row = if end_rest.is_empty() {
                None
            } else {
                Some(parse_row(end_rest, second)?)
            };
            match (start_row, end_row) {
                (None, Some(_)) => {
                    return Err(bad(second, "column-only start needs a column-only end"))
                }
                (None, None) => Range::columns(start_col, end_col, 1),
                (Some(r), None) => Range::columns(start_col, end_col, r),
                (Some(r1), Some(r2)) => Range::rect(
                    CellAddress::new(start_col, r1),
                    CellAddress::new(end_col, r2),
                ),
            }
        }
    };
    let range = Range { sheet, ..range };
    range.check(text)?;
    Ok(range)
}

fn split_sheet(text: &str) -> Result<(Option<String>, &str), SheetError> {
    if let Some(rest) = text.strip_prefix('\'') {
        let mut name = String::new();
        let mut chars = rest.char_indices();
        while let Some((i, c)) = chars.next() {
            if c == '\'' {
                if rest[i + 1..].starts_with('\'') {
                    name.push('\'');
                    chars.next();
                    continue;
                }
                let after = &rest[i + 1..];
                let body = after
                    .strip_prefix('!')
                    .ok_or_else(|| bad(text, "expected '!' after quoted sheet name"))?;
                return Ok((Some(name), body));
            }
            name.push(c);
        }
        return Err(bad(text, "unterminated sheet name"));
    }
    match text.split_once('!') {
        Some((name, body)) => {
            if name.is_empty() {
                return Err(bad(text, "empty sheet name"));
            }
            Ok((Some(name.to_string()), body))
        }
        None => Ok((None, text)),
    }
}

/// Canonical A1 text for a range; inverse of [`parse_range`].
pub fn format_range(r: &Range) -> String {
    let prefix = r
        .sheet
        .as_deref()
        .map(|s| format!("{}!", quote_sheet_name(s)))
        .unwrap_or_default();
    let body = match r.end_row {
        _ if r.is_single_cell() => r.start.to_string(),
        Some(end_row) => format!(
            "{}:{}",
            r.start,
            CellAddress::new(r.end_col, end_row)
        ),
        None if r.start.row == 1 => format!(
            "{}:{}",
            column_letters(r.start.col),
            column_letters(r.end_col)
        ),
        None => format!("{}:{}", r.start, column_letters(r.end_col)),
    };
    format!("{prefix}{body}")
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_range(self))
    }
}
