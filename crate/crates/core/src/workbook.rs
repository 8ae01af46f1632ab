//! Sheets, workbooks and immutable snapshots.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::ops::Deref;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::address::{check_sheet_name, CellAddress, MAX_COLS, MAX_ROWS};
use crate::error::SheetError;
use crate::value::CellValue;

static EMPTY: CellValue = CellValue::Empty;
static JOURNAL_IDS: AtomicU64 = AtomicU64::new(1);

/// Kind of a row/column insertion or deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuralKind {
    RowsInserted,
    RowsDeleted,
    ColsInserted,
    ColsDeleted,
}

/// A row/column insertion or deletion on one sheet. `at` is the first
/// affected 1-based index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuralChange {
    pub sheet: String,
    pub kind: StructuralKind,
    pub at: u32,
    pub count: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct JournalEntry {
    pub(crate) id: u64,
    pub(crate) change: StructuralChange,
}

/// One named grid of cells. Only non-empty cells are stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sheet {
    name: String,
    cells: BTreeMap<CellAddress, CellValue>,
}

impl Sheet {
    pub fn new(name: impl Into<String>) -> Result<Sheet, SheetError> {
        let name = name.into();
        check_sheet_name(&name)?;
        Ok(Sheet {
            name,
            cells: BTreeMap::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn get(&self, addr: CellAddress) -> &CellValue {
        self.cells.get(&addr).unwrap_or(&EMPTY)
    }

    /// Stored cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (CellAddress, &CellValue)> {
        self.cells.iter().map(|(a, v)| (*a, v))
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn used_rows(&self) -> u32 {
        self.cells.keys().next_back().map_or(0, |a| a.row)
    }

    pub fn used_cols(&self) -> u32 {
        self.cells.keys().map(|a| a.col).max().unwrap_or(0)
    }

    /// Dense materialization of the used extent, row by row.
    pub fn dense(&self) -> Vec<Vec<CellValue>> {
        let (rows, cols) = (self.used_rows(), self.used_cols());
        (1..=rows)
            .map(|r| {
                (1..=cols)
                    .map(|c| self.get(CellAddress::new(c, r)).clone())
                    .collect()
            })
            .collect()
    }

    pub(crate) fn set(&mut self, addr: CellAddress, value: CellValue) -> Result<(), SheetError> {
        if addr.col == 0 || addr.row == 0 || !addr.in_bounds() {
            return Err(SheetError::OutOfBounds(format!("cell {addr}")));
        }
        let value = value.normalized();
        value.validate()?;
        if value.is_empty() {
            self.cells.remove(&addr);
        } else {
            self.cells.insert(addr, value);
        }
        Ok(())
    }

    /// Applies a structural edit. Returns whether any stored cell moved or
    /// was removed.
    pub(crate) fn apply_structural(
        &mut self,
        kind: StructuralKind,
        at: u32,
        count: u32,
    ) -> Result<bool, SheetError> {
        if at == 0 || count == 0 {
            return Err(SheetError::OutOfBounds(format!(
                "structural edit at {at} count {count}"
            )));
        }
        let by_row = matches!(kind, StructuralKind::RowsInserted | StructuralKind::RowsDeleted);
        let key = |a: &CellAddress| if by_row { a.row } else { a.col };
        let extent = if by_row { self.used_rows() } else { self.used_cols() };
        if extent < at {
            return Ok(false);
        }
        let limit = if by_row { MAX_ROWS } else { MAX_COLS };
        let inserting = matches!(kind, StructuralKind::RowsInserted | StructuralKind::ColsInserted);
        if inserting && u64::from(extent) + u64::from(count) > u64::from(limit) {
            return Err(SheetError::OutOfBounds(format!(
                "inserting {count} would push cells past index {limit}"
            )));
        }
        let old = std::mem::take(&mut self.cells);
        for (mut addr, value) in old {
            let k = key(&addr);
            let moved = if k < at {
                Some(k)
            } else if inserting {
                Some(k + count)
            } else if k - at < count {
                None
            } else {
                Some(k - count)
            };
            if let Some(k) = moved {
                if by_row {
                    addr.row = k;
                } else {
                    addr.col = k;
                }
                self.cells.insert(addr, value);
            }
        }
        Ok(true)
    }
}

/// An ordered set of uniquely named sheets with one active sheet.
///
/// Besides cell content the workbook keeps an in-memory journal of
/// structural edits, so a diff between two snapshots of the same lineage can
/// report row/column insertions and deletions instead of shifted cells.
/// Equality and hashing consider only sheets and the active index.
#[derive(Debug, Clone)]
pub struct Workbook {
    sheets: Vec<Sheet>,
    active: usize,
    journal: Vec<JournalEntry>,
    snapshots_taken: u64,
}

impl Default for Workbook {
    fn default() -> Self {
        Workbook::new()
    }
}

impl PartialEq for Workbook {
    fn eq(&self, other: &Self) -> bool {
        self.active == other.active && self.sheets == other.sheets
    }
}

impl Eq for Workbook {}

impl Hash for Workbook {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.active.hash(state);
        self.sheets.hash(state);
    }
}

fn same_name(a: &str, b: &str) -> bool {
    a == b || a.to_lowercase() == b.to_lowercase()
}

impl Workbook {
    /// A workbook with a single empty sheet named `Sheet1`.
    pub fn new() -> Workbook {
        Workbook {
            sheets: vec![Sheet::new("Sheet1").expect("valid name")],
            active: 0,
            journal: Vec::new(),
            snapshots_taken: 0,
        }
    }

    pub fn from_sheets(sheets: Vec<Sheet>, active: usize) -> Result<Workbook, SheetError> {
        if sheets.is_empty() {
            return Err(SheetError::LastSheet);
        }
        for (i, s) in sheets.iter().enumerate() {
            if sheets[..i].iter().any(|p| same_name(p.name(), s.name())) {
                return Err(SheetError::DuplicateSheet(s.name().to_string()));
            }
        }
        if active >= sheets.len() {
            return Err(SheetError::OutOfBounds(format!("active sheet index {active}")));
        }
        Ok(Workbook {
            sheets,
            active,
            journal: Vec::new(),
            snapshots_taken: 0,
        })
    }

    pub fn sheets(&self) -> &[Sheet] {
        &self.sheets
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    pub fn active_sheet(&self) -> &Sheet {
        &self.sheets[self.active]
    }

    pub fn set_active(&mut self, index: usize) -> Result<(), SheetError> {
        if index >= self.sheets.len() {
            return Err(SheetError::OutOfBounds(format!("active sheet index {index}")));
        }
        self.active = index;
        Ok(())
    }

    /// Case-insensitive sheet lookup.
    pub fn sheet_index(&self, name: &str) -> Option<usize> {
        self.sheets.iter().position(|s| same_name(s.name(), name))
    }

    pub fn sheet(&self, name: &str) -> Result<&Sheet, SheetError> {
        self.sheet_index(name)
            .map(|i| &self.sheets[i])
            .ok_or_else(|| SheetError::UnknownSheet(name.to_string()))
    }

    /// The named sheet, or the active sheet when `name` is `None`.
    pub fn resolve_sheet(&self, name: Option<&str>) -> Result<&Sheet, SheetError> {
        match name {
            Some(n) => self.sheet(n),
            None => Ok(self.active_sheet()),
        }
    }

    fn index_of(&self, name: Option<&str>) -> Result<usize, SheetError> {
        match name {
            Some(n) => self
                .sheet_index(n)
                .ok_or_else(|| SheetError::UnknownSheet(n.to_string())),
            None => Ok(self.active),
        }
    }

    pub fn add_sheet(&mut self, name: &str) -> Result<(), SheetError> {
        self.insert_sheet(self.sheets.len(), Sheet::new(name)?)
    }

    pub fn insert_sheet(&mut self, index: usize, sheet: Sheet) -> Result<(), SheetError> {
        if self.sheet_index(sheet.name()).is_some() {
            return Err(SheetError::DuplicateSheet(sheet.name().to_string()));
        }
        if index > self.sheets.len() {
            return Err(SheetError::OutOfBounds(format!("sheet position {index}")));
        }
        self.sheets.insert(index, sheet);
        if index <= self.active && self.sheets.len() > 1 {
            self.active += 1;
        }
        Ok(())
    }

    pub fn remove_sheet(&mut self, name: &str) -> Result<Sheet, SheetError> {
        let i = self.index_of(Some(name))?;
        if self.sheets.len() == 1 {
            return Err(SheetError::LastSheet);
        }
        let sheet = self.sheets.remove(i);
        if self.active > i || self.active == self.sheets.len() {
            self.active = self.active.saturating_sub(1);
        }
        Ok(sheet)
    }

    pub fn get_cell(&self, sheet: &str, addr: CellAddress) -> Result<CellValue, SheetError> {
        Ok(self.sheet(sheet)?.get(addr).clone())
    }

    /// Writes a cell; `Empty` removes it and text starting with `=` is
    /// stored as a formula.
    pub fn set_cell(
        &mut self,
        sheet: &str,
        addr: CellAddress,
        value: CellValue,
    ) -> Result<(), SheetError> {
        let i = self.index_of(Some(sheet))?;
        self.sheets[i].set(addr, value)
    }

    /// Like [`Workbook::set_cell`] with `None` meaning the active sheet.
    pub fn set_cell_in(
        &mut self,
        sheet: Option<&str>,
        addr: CellAddress,
        value: CellValue,
    ) -> Result<(), SheetError> {
        let i = self.index_of(sheet)?;
        self.sheets[i].set(addr, value)
    }

    /// Applies and journals a structural edit. Edits beyond the used extent
    /// move nothing and are not journaled.
    pub fn apply_structural(
        &mut self,
        sheet: Option<&str>,
        kind: StructuralKind,
        at: u32,
        count: u32,
    ) -> Result<bool, SheetError> {
        let i = self.index_of(sheet)?;
        let changed = self.sheets[i].apply_structural(kind, at, count)?;
        if changed {
            self.journal.push(JournalEntry {
                id: JOURNAL_IDS.fetch_add(1, Ordering::Relaxed),
                change: StructuralChange {
                    sheet: self.sheets[i].name().to_string(),
                    kind,
                    at,
                    count,
                },
            });
        }
        Ok(changed)
    }

    pub fn insert_rows(&mut self, sheet: Option<&str>, at: u32, count: u32) -> Result<bool, SheetError> {
        self.apply_structural(sheet, StructuralKind::RowsInserted, at, count)
    }

    pub fn delete_rows(&mut self, sheet: Option<&str>, at: u32, count: u32) -> Result<bool, SheetError> {
        self.apply_structural(sheet, StructuralKind::RowsDeleted, at, count)
    }

    pub fn insert_cols(&mut self, sheet: Option<&str>, at: u32, count: u32) -> Result<bool, SheetError> {
        self.apply_structural(sheet, StructuralKind::ColsInserted, at, count)
    }

    pub fn delete_cols(&mut self, sheet: Option<&str>, at: u32, count: u32) -> Result<bool, SheetError> {
        self.apply_structural(sheet, StructuralKind::ColsDeleted, at, count)
    }

    pub(crate) fn journal(&self) -> &[JournalEntry] {
        &self.journal
    }

    pub(crate) fn sheets_mut(&mut self) -> &mut Vec<Sheet> {
        &mut self.sheets
    }

    pub(crate) fn set_active_unchecked(&mut self, index: usize) {
        self.active = index;
    }

    /// Captures an immutable copy tagged with the next version number.
    pub fn snapshot(&mut self) -> SheetSnapshot {
        self.snapshots_taken += 1;
        SheetSnapshot {
            version: self.snapshots_taken,
            workbook: Arc::new(self.clone()),
        }
    }

    /// Number of snapshots taken so far; the version of the latest one.
    pub fn version(&self) -> u64 {
        self.snapshots_taken
    }

    /// Raises the version counter to at least `version`, e.g. after loading
    /// a persisted workbook, so versions keep increasing across restarts.
    pub fn restore_version(&mut self, version: u64) {
        self.snapshots_taken = self.snapshots_taken.max(version);
    }

    /// Content hash over sheets and active index, stable within a process.
    pub fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

/// An immutable, cheaply clonable copy of a workbook.
#[derive(Debug, Clone)]
pub struct SheetSnapshot {
    version: u64,
    workbook: Arc<Workbook>,
}

impl SheetSnapshot {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn workbook(&self) -> &Workbook {
        &self.workbook
    }
}

impl Deref for SheetSnapshot {
    type Target = Workbook;

    fn deref(&self) -> &Workbook {
        &self.workbook
    }
}

impl PartialEq for SheetSnapshot {
    fn eq(&self, other: &Self) -> bool {
        *self.workbook == *other.workbook
    }
}

/// Free-function form of [`Workbook::snapshot`].
pub fn snapshot(wb: &mut Workbook) -> SheetSnapshot {
    wb.snapshot()
}
