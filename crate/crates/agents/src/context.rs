//! Bounded view of a workbook for prompts.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use sheetmind_core::{CellAddress, Workbook};

pub const SAMPLE_ROWS: u32 = 20;
pub const SAMPLE_COLS: u32 = 26;
pub const MAX_CELL_CHARS: usize = 256;
pub const TRUNCATION_MARKER: &str = "…[truncated]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetExtent {
    pub name: String,
    pub rows: u32,
    pub cols: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCell {
    pub addr: CellAddress,
    pub tag: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetContext {
    pub sheets: Vec<SheetExtent>,
    pub active: String,
    /// Non-empty cells of the active sheet inside the sample window, row-major.
    pub sample: Vec<SampleCell>,
    /// Type tag to cell count over the whole active sheet.
    pub histogram: BTreeMap<String, usize>,
}

fn clip(text: String) -> String {
    if text.chars().count() <= MAX_CELL_CHARS {
        return text;
    }
    let mut out: String = text.chars().take(MAX_CELL_CHARS).collect();
    out.push_str(TRUNCATION_MARKER);
    out
}

pub fn extract_context(wb: &Workbook) -> SheetContext {
    let sheets = wb
        .sheets()
        .iter()
        .map(|s| SheetExtent {
            name: s.name().to_string(),
            rows: s.used_rows(),
            cols: s.used_cols(),
        })
        .collect();
    let active = wb.active_sheet();
    let mut histogram = BTreeMap::new();
    let mut sample = Vec::new();
    for (addr, v) in active.cells() {
        *histogram.entry(v.type_tag().to_string()).or_insert(0) += 1;
        if addr.row <= SAMPLE_ROWS && addr.col <= SAMPLE_COLS {
            sample.push(SampleCell {
                addr,
                tag: v.type_tag().to_string(),
                text: clip(v.render()),
            });
        }
    }
    sample.sort_by_key(|c| c.addr);
    SheetContext {
        sheets,
        active: active.name().to_string(),
        sample,
        histogram,
    }
}

impl SheetContext {
    /// Plain-text block embedded in prompts.
    pub fn render(&self) -> String {
        let mut out = String::from("Sheets:");
        for s in &self.sheets {
            let mark = if s.name == self.active { ", active" } else { "" };
            let _ = write!(out, "\n- {} ({} rows x {} cols{mark})", s.name, s.rows, s.cols);
        }
        if self.histogram.is_empty() {
            let _ = write!(out, "\nSheet {} is empty.", self.active);
            return out;
        }
        let hist: Vec<String> = self.histogram.iter().map(|(t, n)| format!("{t}={n}")).collect();
        let _ = write!(out, "\nCell types on {}: {}", self.active, hist.join(", "));
        let _ = write!(
            out,
            "\nCells of {} (first {SAMPLE_ROWS} rows x {SAMPLE_COLS} columns, non-empty only):",
            self.active
        );
        for c in &self.sample {
            let _ = write!(out, "\n{} [{}] {}", c.addr, c.tag, c.text.replace('\n', "\\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sheetmind_core::CellValue;

    #[test]
    fn empty_workbook() {
        let ctx = extract_context(&Workbook::new());
        assert_eq!(ctx.sheets[0].rows, 0);
        assert_eq!(ctx.sheets[0].cols, 0);
        assert!(ctx.sample.is_empty());
        assert!(ctx.render().contains("is empty"));
    }

    #[test]
    fn large_sheet_is_clipped() {
        let mut wb = Workbook::new();
        for r in 1..=100 {
            for c in 1..=100 {
                wb.set_cell("Sheet1", CellAddress::new(c, r), CellValue::Number(1.0)).unwrap();
            }
        }
        let ctx = extract_context(&wb);
        assert_eq!(ctx.sample.len(), 20 * 26);
        assert!(ctx.sample.iter().all(|c| c.addr.row <= 20 && c.addr.col <= 26));
        assert_eq!(ctx.histogram.values().sum::<usize>(), 10_000);
        assert_eq!((ctx.sheets[0].rows, ctx.sheets[0].cols), (100, 100));
    }

    #[test]
    fn long_text_is_truncated() {
        let mut wb = Workbook::new();
        wb.set_cell("Sheet1", CellAddress::new(1, 1), CellValue::Text("x".repeat(1000)))
            .unwrap();
        let text = &extract_context(&wb).sample[0].text;
        assert_eq!(text.chars().count(), 256 + TRUNCATION_MARKER.chars().count());
        assert!(text.ends_with(TRUNCATION_MARKER));
    }
}
