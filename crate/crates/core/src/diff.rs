//! Minimal deltas between workbook states.
//!
//! A [`SheetDiff`] is applied in a fixed order: sheet removals, structural
//! edits, sheet additions, cell changes, active sheet. Cell changes are
//! expressed in the coordinate frame reached after the structural edits, so
//! cells that merely shifted with an inserted or deleted row do not appear
//! as cell changes.

use serde::{Deserialize, Serialize};

use crate::address::CellAddress;
use crate::error::SheetError;
use crate::value::CellValue;
use crate::workbook::{Sheet, StructuralChange, Workbook};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellChange {
    pub sheet: String,
    pub addr: CellAddress,
    pub before: CellValue,
    pub after: CellValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SheetChange {
    SheetAdded { name: String, index: usize },
    SheetRemoved { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveChange {
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetDiff {
    pub cell_changes: Vec<CellChange>,
    pub structural_changes: Vec<StructuralChange>,
    pub sheet_changes: Vec<SheetChange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<ActiveChange>,
}

impl SheetDiff {
    pub fn is_empty(&self) -> bool {
        self.cell_changes.is_empty()
            && self.structural_changes.is_empty()
            && self.sheet_changes.is_empty()
            && self.active.is_none()
    }
}

/// Computes the delta taking `before` to `after`.
pub fn diff(before: &Workbook, after: &Workbook) -> SheetDiff {
    if before == after {
        return SheetDiff::default();
    }

    let retained = retained_sheets(before, after);
    let mut out = SheetDiff::default();

    for s in before.sheets() {
        if !retained.contains(&s.name()) {
            out.sheet_changes.push(SheetChange::SheetRemoved {
                name: s.name().to_string(),
            });
        }
    }

    let mut frame = before.clone();
    frame
        .sheets_mut()
        .retain(|s| retained.contains(&s.name()));

    let candidates: Vec<StructuralChange> = shared_journal_suffix(before, after)
        .into_iter()
        .filter(|c| retained.contains(&c.sheet.as_str()))
        .collect();
    let mut replayed = frame.clone();
    let replay_ok = candidates.iter().all(|c| {
        replayed
            .sheet_index(&c.sheet)
            .is_some_and(|i| replayed.sheets_mut()[i].apply_structural(c.kind, c.at, c.count).is_ok())
    });
    if replay_ok {
        frame = replayed;
        out.structural_changes = candidates;
    }

    for (index, s) in after.sheets().iter().enumerate() {
        if !retained.contains(&s.name()) {
            out.sheet_changes.push(SheetChange::SheetAdded {
                name: s.name().to_string(),
                index,
            });
            frame
                .sheets_mut()
                .insert(index, Sheet::new(s.name()).expect("existing name is valid"));
        }
    }

    for (target, current) in after.sheets().iter().zip(frame.sheets()) {
        debug_assert_eq!(target.name(), current.name());
        cell_delta(current, target, &mut out.cell_changes);
    }

    if before.active_index() != after.active_index() {
        out.active = Some(ActiveChange {
            before: before.active_index(),
            after: after.active_index(),
        });
    }
    out
}

/// Sheet names present in both workbooks in a consistent relative order.
fn retained_sheets<'a>(before: &Workbook, after: &'a Workbook) -> Vec<&'a str> {
    let mut kept = Vec::new();
    let mut last = None;
    for s in after.sheets() {
        let pos = before.sheets().iter().position(|b| b.name() == s.name());
        if let Some(pos) = pos {
            if last.is_none_or(|l| pos > l) {
                kept.push(s.name());
                last = Some(pos);
            }
        }
    }
    kept
}

/// Structural edits journaled on `after` since `before`, when `after`
/// descends from `before`.
fn shared_journal_suffix(before: &Workbook, after: &Workbook) -> Vec<StructuralChange> {
    let (bj, aj) = (before.journal(), after.journal());
    if aj.len() < bj.len() {
        return Vec::new();
    }
    let same_lineage = match bj.last() {
        None => true,
        Some(last) => aj[bj.len() - 1].id == last.id,
    };
    if !same_lineage {
        return Vec::new();
    }
    aj[bj.len()..].iter().map(|e| e.change.clone()).collect()
}

fn cell_delta(from: &Sheet, to: &Sheet, out: &mut Vec<CellChange>) {
    let mut addrs: Vec<CellAddress> = from.cells().map(|(a, _)| a).collect();
    addrs.extend(to.cells().map(|(a, _)| a));
    addrs.sort();
    addrs.dedup();
    for addr in addrs {
        let (b, a) = (from.get(addr), to.get(addr));
        if b != a {
            out.push(CellChange {
                sheet: to.name().to_string(),
                addr,
                before: b.clone(),
                after: a.clone(),
            });
        }
    }
}

fn mismatch(msg: String) -> SheetError {
    SheetError::DiffMismatch(msg)
}

/// Replays `d` on a copy of `before`, checking every recorded `before`
/// value along the way.
pub fn apply_diff(before: &Workbook, d: &SheetDiff) -> Result<Workbook, SheetError> {
    let mut wb = before.clone();

    for change in &d.sheet_changes {
        if let SheetChange::SheetRemoved { name } = change {
            let sheets = wb.sheets_mut();
            let i = sheets
                .iter()
                .position(|s| s.name() == name)
                .ok_or_else(|| mismatch(format!("removed sheet {name:?} not present")))?;
            sheets.remove(i);
        }
    }

    for c in &d.structural_changes {
        let i = wb
            .sheets()
            .iter()
            .position(|s| s.name() == c.sheet)
            .ok_or_else(|| mismatch(format!("structural change on unknown sheet {:?}", c.sheet)))?;
        wb.apply_structural(Some(&c.sheet), c.kind, c.at, c.count)
            .map_err(|e| mismatch(format!("structural change on sheet #{i}: {e}")))?;
    }

    let mut added: Vec<(&String, usize)> = d
        .sheet_changes
        .iter()
        .filter_map(|c| match c {
            SheetChange::SheetAdded { name, index } => Some((name, *index)),
            SheetChange::SheetRemoved { .. } => None,
        })
        .collect();
    added.sort_by_key(|(_, i)| *i);
    for (name, index) in added {
        let sheets = wb.sheets_mut();
        if sheets.iter().any(|s| s.name().to_lowercase() == name.to_lowercase()) {
            return Err(mismatch(format!("added sheet {name:?} already exists")));
        }
        if index > sheets.len() {
            return Err(mismatch(format!("added sheet {name:?} at position {index}")));
        }
        sheets.insert(index, Sheet::new(name.as_str())?);
    }

    for c in &d.cell_changes {
        let current = wb
            .get_cell(&c.sheet, c.addr)
            .map_err(|e| mismatch(e.to_string()))?;
        if current != c.before {
            return Err(mismatch(format!(
                "{}!{} holds {:?}, diff expects {:?}",
                c.sheet, c.addr, current, c.before
            )));
        }
        wb.set_cell(&c.sheet, c.addr, c.after.clone())?;
    }

    if let Some(active) = d.active {
        if wb.active_index() != active.before {
            return Err(mismatch(format!(
                "active sheet is {}, diff expects {}",
                wb.active_index(),
                active.before
            )));
        }
        wb.set_active_unchecked(active.after);
    }

    if wb.sheets().is_empty() {
        return Err(SheetError::LastSheet);
    }
    if wb.active_index() >= wb.sheets().len() {
        return Err(mismatch(format!("active sheet index {}", wb.active_index())));
    }
    Ok(wb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbook::StructuralKind;

    fn a(col: u32, row: u32) -> CellAddress {
        CellAddress::new(col, row)
    }

    #[test]
    fn identical_snapshots_give_empty_diff() {
        let mut wb = Workbook::new();
        wb.set_cell("Sheet1", a(1, 1), CellValue::Number(1.0)).unwrap();
        let s = wb.snapshot();
        assert!(diff(&s, &s).is_empty());
        assert_eq!(apply_diff(&s, &SheetDiff::default()).unwrap(), *s.workbook());
    }

    #[test]
    fn single_cell_change() {
        let mut wb = Workbook::new();
        wb.set_cell("Sheet1", a(1, 1), CellValue::Number(1.0)).unwrap();
        let s = wb.snapshot();
        wb.set_cell("Sheet1", a(1, 1), CellValue::Number(2.0)).unwrap();
        let t = wb.snapshot();
        let d = diff(&s, &t);
        assert_eq!(
            d.cell_changes,
            vec![CellChange {
                sheet: "Sheet1".into(),
                addr: a(1, 1),
                before: CellValue::Number(1.0),
                after: CellValue::Number(2.0),
            }]
        );
        assert!(d.structural_changes.is_empty());
    }

    #[test]
    fn row_deletion_is_structural() {
        let mut wb = Workbook::new();
        for r in 1..=3 {
            wb.set_cell("Sheet1", a(1, r), CellValue::Number(r as f64)).unwrap();
        }
        let s = wb.snapshot();
        wb.delete_rows(None, 2, 1).unwrap();
        let t = wb.snapshot();
        let d = diff(&s, &t);
        assert_eq!(
            d.structural_changes,
            vec![StructuralChange {
                sheet: "Sheet1".into(),
                kind: StructuralKind::RowsDeleted,
                at: 2,
                count: 1
            }]
        );
        assert!(d.cell_changes.is_empty());
        assert_eq!(apply_diff(&s, &d).unwrap(), *t.workbook());
    }

    #[test]
    fn unrelated_workbooks_fall_back_to_cells() {
        let mut s = Workbook::new();
        s.set_cell("Sheet1", a(1, 1), CellValue::Number(1.0)).unwrap();
        s.set_cell("Sheet1", a(1, 2), CellValue::Number(2.0)).unwrap();
        let mut t = Workbook::new();
        t.set_cell("Sheet1", a(1, 1), CellValue::Number(2.0)).unwrap();
        let d = diff(&s, &t);
        assert!(d.structural_changes.is_empty());
        assert_eq!(d.cell_changes.len(), 2);
        assert_eq!(apply_diff(&s, &d).unwrap(), t);
    }

    #[test]
    fn sheet_add_remove_and_reorder() {
        let mut s = Workbook::new();
        s.add_sheet("A").unwrap();
        s.add_sheet("B").unwrap();
        s.set_cell("B", a(1, 1), CellValue::Bool(true)).unwrap();
        let mut t = Workbook::from_sheets(
            vec![
                s.sheet("B").unwrap().clone(),
                Sheet::new("C").unwrap(),
                s.sheet("Sheet1").unwrap().clone(),
            ],
            2,
        )
        .unwrap();
        t.set_cell("C", a(2, 2), CellValue::Text("new".into())).unwrap();
        let d = diff(&s, &t);
        assert_eq!(apply_diff(&s, &d).unwrap(), t);
        assert!(d.active.is_some());
    }

    #[test]
    fn apply_rejects_inconsistent_diffs() {
        let s = Workbook::new();
        let d = SheetDiff {
            cell_changes: vec![CellChange {
                sheet: "Nope".into(),
                addr: a(1, 1),
                before: CellValue::Empty,
                after: CellValue::Bool(true),
            }],
            ..SheetDiff::default()
        };
        assert!(matches!(apply_diff(&s, &d), Err(SheetError::DiffMismatch(_))));

        let d = SheetDiff {
            cell_changes: vec![CellChange {
                sheet: "Sheet1".into(),
                addr: a(1, 1),
                before: CellValue::Bool(false),
                after: CellValue::Bool(true),
            }],
            ..SheetDiff::default()
        };
        assert!(apply_diff(&s, &d).is_err());
    }

    #[test]
    fn diff_serializes_addresses_as_a1() {
        let d = SheetDiff {
            cell_changes: vec![CellChange {
                sheet: "Sheet1".into(),
                addr: a(5, 2),
                before: CellValue::Empty,
                after: CellValue::Number(1.0),
            }],
            ..SheetDiff::default()
        };
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains(r#""addr":"E2""#), "{json}");
        let back: SheetDiff = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
