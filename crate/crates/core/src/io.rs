//! CSV and workbook-JSON file formats.
//!
//! workbook-json:
//! `{"sheets":[{"name":str,"cells":{"A1":{"t":"n|s|b|d|f|e","v":...}}}],"active":int}`
//! Cells are written in row-major order; saving a loaded canonical file
//! reproduces it byte for byte.

use std::fmt;
use std::str::FromStr;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::address::CellAddress;
use crate::error::SheetError;
use crate::value::CellValue;
use crate::workbook::{Sheet, Workbook};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    WorkbookJson,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" | "workbook-json" => Ok(Format::WorkbookJson),
            other => Err(format!("unknown workbook format {other:?}")),
        }
    }
}

impl Format {
    /// Guesses the format from a file name: `.csv` is CSV, anything else JSON.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::WorkbookJson,
        }
    }
}

pub fn load_workbook(source: &str, format: Format) -> Result<Workbook, SheetError> {
    match format {
        Format::Csv => load_csv(source),
        Format::WorkbookJson => from_json(source),
    }
}

pub fn save_workbook(wb: &Workbook, format: Format) -> Result<String, SheetError> {
    match format {
        Format::Csv => save_csv(wb.active_sheet()),
        Format::WorkbookJson => Ok(to_json(wb)),
    }
}

/// Loads RFC-4180 CSV into a single sheet named `Sheet1`, inferring cell
/// types with [`CellValue::infer`].
pub fn load_csv(source: &str) -> Result<Workbook, SheetError> {
    check_quoting(source)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source.as_bytes());
    let mut wb = Workbook::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| SheetError::Csv(e.to_string()))?;
        for (c, field) in record.iter().enumerate() {
            let addr = CellAddress::new(c as u32 + 1, r as u32 + 1);
            wb.set_cell("Sheet1", addr, CellValue::infer(field))?;
        }
    }
    Ok(wb)
}

/// The csv reader tolerates stray and unterminated quotes; RFC-4180 does not.
fn check_quoting(source: &str) -> Result<(), SheetError> {
    let (mut line, mut at_field_start, mut in_quotes, mut after_close) = (1usize, true, false, false);
    let mut chars = source.chars().peekable();
    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                }
                '"' => {
                    in_quotes = false;
                    after_close = true;
                }
                '\n' => line += 1,
                _ => {}
            }
            continue;
        }
        match c {
            ',' | '\n' | '\r' => {
                if c == '\n' {
                    line += 1;
                }
                at_field_start = true;
                after_close = false;
            }
            '"' if at_field_start => {
                in_quotes = true;
                at_field_start = false;
            }
            _ if after_close => {
                return Err(SheetError::Csv(format!("line {line}: text after closing quote")));
            }
            '"' => return Err(SheetError::Csv(format!("line {line}: quote inside unquoted field"))),
            _ => at_field_start = false,
        }
    }
    if in_quotes {
        return Err(SheetError::Csv(format!("line {line}: unterminated quoted field")));
    }
    Ok(())
}

/// Writes the used extent of one sheet as CSV using rendered values.
pub fn save_csv(sheet: &Sheet) -> Result<String, SheetError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in sheet.dense() {
        let fields: Vec<String> = row.iter().map(CellValue::render).collect();
        writer
            .write_record(&fields)
            .map_err(|e| SheetError::Csv(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| SheetError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| SheetError::Csv(e.to_string()))
}

struct SheetCells<'a>(&'a Sheet);

impl Serialize for SheetCells<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.cell_count()))?;
        for (addr, value) in self.0.cells() {
            map.serialize_entry(&addr.to_string(), value)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct SheetOut<'a> {
    name: &'a str,
    cells: SheetCells<'a>,
}

#[derive(Serialize)]
struct WorkbookOut<'a> {
    sheets: Vec<SheetOut<'a>>,
    active: usize,
}

/// Cells in document order, keeping duplicates so they can be reported.
struct CellsIn(Vec<(String, CellValue)>);

impl<'de> Deserialize<'de> for CellsIn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = CellsIn;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of A1 addresses to tagged values")
            }
            fn visit_map<M: MapAccess<'de>>(self, mut m: M) -> Result<CellsIn, M::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, CellValue>()? {
                    out.push((k, v));
                }
                Ok(CellsIn(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SheetIn {
    name: String,
    cells: CellsIn,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkbookIn {
    sheets: Vec<SheetIn>,
    #[serde(default)]
    active: usize,
}

fn build(parsed: WorkbookIn) -> Result<Workbook, SheetError> {
    let mut sheets = Vec::with_capacity(parsed.sheets.len());
    for s in parsed.sheets {
        let mut sheet = Sheet::new(s.name)?;
        let mut seen = std::collections::HashSet::new();
        for (key, value) in s.cells.0 {
            let addr = CellAddress::parse(&key)
                .map_err(|e| SheetError::Json(format!("bad cell key {key:?}: {e}")))?;
            if !seen.insert(addr) {
                return Err(SheetError::Json(format!("duplicate cell {key}")));
            }
            sheet.set(addr, value)?;
        }
        sheets.push(sheet);
    }
    Workbook::from_sheets(sheets, parsed.active)
}

pub fn from_json(source: &str) -> Result<Workbook, SheetError> {
    let parsed: WorkbookIn =
        serde_json::from_str(source).map_err(|e| SheetError::Json(e.to_string()))?;
    build(parsed)
}

pub fn from_json_value(value: serde_json::Value) -> Result<Workbook, SheetError> {
    let parsed: WorkbookIn =
        serde_json::from_value(value).map_err(|e| SheetError::Json(e.to_string()))?;
    build(parsed)
}

fn out(wb: &Workbook) -> WorkbookOut<'_> {
    WorkbookOut {
        sheets: wb
            .sheets()
            .iter()
            .map(|s| SheetOut {
                name: s.name(),
                cells: SheetCells(s),
            })
            .collect(),
        active: wb.active_index(),
    }
}

pub fn to_json(wb: &Workbook) -> String {
    serde_json::to_string(&out(wb)).expect("workbook serializes")
}

pub fn to_json_value(wb: &Workbook) -> serde_json::Value {
    serde_json::to_value(out(wb)).expect("workbook serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_types() {
        let wb = load_csv("a,1\n b,2").unwrap();
        let s = wb.active_sheet();
        assert_eq!(s.name(), "Sheet1");
        assert_eq!((s.used_rows(), s.used_cols()), (2, 2));
        assert_eq!(s.get(CellAddress::new(1, 1)), &CellValue::Text("a".into()));
        assert_eq!(s.get(CellAddress::new(2, 1)), &CellValue::Number(1.0));
        assert_eq!(s.get(CellAddress::new(1, 2)), &CellValue::Text(" b".into()));
        assert_eq!(s.get(CellAddress::new(2, 2)), &CellValue::Number(2.0));
    }

    #[test]
    fn csv_rule_table() {
        let wb = load_csv("2024-01-15,TRUE,=A1,,\"x,y\",3.5e1").unwrap();
        let row: Vec<&CellValue> = (1..=6)
            .map(|c| wb.active_sheet().get(CellAddress::new(c, 1)))
            .collect();
        assert!(matches!(row[0], CellValue::Date(d) if d.as_str() == "2024-01-15"));
        assert_eq!(row[1], &CellValue::Bool(true));
        assert_eq!(row[2], &CellValue::Formula("=A1".into()));
        assert_eq!(row[3], &CellValue::Empty);
        assert_eq!(row[4], &CellValue::Text("x,y".into()));
        assert_eq!(row[5], &CellValue::Number(35.0));
    }

    #[test]
    fn csv_rejects_bad_quoting() {
        for bad in ["\"abc\n", "a\"b,c\n", "\"a\"x,1\n"] {
            assert!(matches!(load_csv(bad), Err(SheetError::Csv(_))), "{bad:?}");
        }
        assert!(load_csv("\"a\"\"b\",\"x\ny\"\r\n1,2").is_ok());
    }

    #[test]
    fn csv_save() {
        let wb = load_csv("a,1\n,\"x,y\"\n").unwrap();
        assert_eq!(save_csv(wb.active_sheet()).unwrap(), "a,1\n,\"x,y\"\n");
    }

    #[test]
    fn json_roundtrip_is_byte_exact() {
        let text = r#"{"sheets":[{"name":"Sheet1","cells":{"B1":{"t":"n","v":1.5},"A2":{"t":"s","v":"hi \"x\""},"C2":{"t":"b","v":true}}},{"name":"Data","cells":{"A1":{"t":"d","v":"2024-01-15"},"A3":{"t":"f","v":"=SUM(A1:A2)"}}}],"active":1}"#;
        let wb = from_json(text).unwrap();
        assert_eq!(to_json(&wb), text);
        assert_eq!(from_json(&to_json(&wb)).unwrap(), wb);
    }

    #[test]
    fn json_errors() {
        assert!(from_json("{").is_err());
        assert!(matches!(
            from_json(r#"{"sheets":[{"name":"A","cells":{}},{"name":"a","cells":{}}],"active":0}"#),
            Err(SheetError::DuplicateSheet(_))
        ));
        assert!(from_json(r#"{"sheets":[],"active":0}"#).is_err());
        assert!(from_json(r#"{"sheets":[{"name":"A","cells":{}}],"active":3}"#).is_err());
        assert!(from_json(r#"{"sheets":[{"name":"A","cells":{"a1":{"t":"n","v":1}}}],"active":0}"#).is_err());
        assert!(from_json(r#"{"sheets":[{"name":"A","cells":{"A1":{"t":"n","v":1},"A1":{"t":"n","v":2}}}],"active":0}"#).is_err());
    }

    #[test]
    fn empty_tag_is_not_stored() {
        let wb = from_json(r#"{"sheets":[{"name":"A","cells":{"A1":{"t":"e","v":null}}}],"active":0}"#)
            .unwrap();
        assert_eq!(wb.active_sheet().cell_count(), 0);
    }
}
