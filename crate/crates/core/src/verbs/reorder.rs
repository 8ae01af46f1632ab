use std::cmp::Ordering;

use crate::address::{parse_column, CellAddress, MAX_COLS, MAX_ROWS};
use crate::exec::{ExecError, SelectedCell};
use crate::grammar::{Action, Verb};
use crate::validate::InvalidCode;
use crate::value::CellValue;
use crate::workbook::Workbook;

use super::{
    copy_target, resolve, CondPolicy, ExecContext, NamedKind, NamedParam, ParamKind, Rejection,
    Signature, VerbHandler,
};

pub struct Sort;

static SORT_PARAMS: [NamedParam; 2] = [
    NamedParam {
        key: "key",
        kind: NamedKind::Column,
        required: true,
    },
    NamedParam {
        key: "order",
        kind: NamedKind::OneOf(&["ASC", "DESC"]),
        required: false,
    },
];

static SORT_SIG: Signature = Signature {
    positional: &[ParamKind::Range],
    named: &SORT_PARAMS,
    cond: CondPolicy::Forbidden,
};

fn sort_key(action: &Action) -> Result<u32, Rejection> {
    let key = action.named("key").and_then(|l| l.as_text()).expect("signature checked");
    parse_column(key).ok_or_else(|| {
        Rejection::new(InvalidCode::Semantic, format!("sort key {key:?} is not a column letter"))
    })
}

/// Orders sort keys; empties go last whichever direction is requested.
pub fn compare_keys(a: &CellValue, b: &CellValue, descending: bool) -> Ordering {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) if descending => b.sort_cmp(a),
        (false, false) => a.sort_cmp(b),
    }
}

impl VerbHandler for Sort {
    fn verb(&self) -> Verb {
        Verb::Sort
    }

    fn signature(&self) -> &'static Signature {
        &SORT_SIG
    }

    fn check(&self, action: &Action, _wb: &Workbook) -> Result<(), Rejection> {
        let range = action.nth_range(0).expect("signature checked");
        let key = sort_key(action)?;
        if key < range.start.col || key > range.end_col {
            return Err(Rejection::new(
                InvalidCode::Semantic,
                format!("sort key column lies outside {range}"),
            ));
        }
        Ok(())
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let range = ctx.action.nth_range(0).expect("signature checked");
        let key = sort_key(ctx.action).map_err(ExecError::from)?;
        let descending = ctx.action.named("order").and_then(|l| l.as_text()) == Some("DESC");
        let block = resolve(ctx.wb, range)?;
        let Some((r1, r2)) = block.rows else {
            return Ok(None);
        };
        let (c1, c2) = block.cols;
        let mut rows: Vec<Vec<CellValue>> = {
            let sheet = ctx.wb.sheet(&block.sheet)?;
            (r1..=r2)
                .map(|r| (c1..=c2).map(|c| sheet.get(CellAddress::new(c, r)).clone()).collect())
                .collect()
        };
        let k = (key - c1) as usize;
        rows.sort_by(|a, b| compare_keys(&a[k], &b[k], descending));
        for (dr, row) in rows.into_iter().enumerate() {
            for (dc, value) in row.into_iter().enumerate() {
                let addr = CellAddress::new(c1 + dc as u32, r1 + dr as u32);
                ctx.wb.set_cell(&block.sheet, addr, value)?;
            }
        }
        Ok(None)
    }
}

pub struct Copy;

static COPY_SIG: Signature = Signature {
    positional: &[ParamKind::Range, ParamKind::Range],
    named: &[],
    cond: CondPolicy::Forbidden,
};

impl VerbHandler for Copy {
    fn verb(&self) -> Verb {
        Verb::Copy
    }

    fn signature(&self) -> &'static Signature {
        &COPY_SIG
    }

    fn check(&self, action: &Action, wb: &Workbook) -> Result<(), Rejection> {
        let dst = action.nth_range(1).expect("signature checked");
        if !dst.is_single_cell() {
            return Err(Rejection::new(
                InvalidCode::Semantic,
                "COPY destination must be a single top-left cell",
            ));
        }
        let src = action.nth_range(0).expect("signature checked");
        let (Ok(src), Ok(target)) = (
            resolve(wb, src),
            resolve(wb, src).and_then(|s| copy_target(wb, &s, dst)),
        ) else {
            return Ok(());
        };
        if target.cols.1 > MAX_COLS || target.rows.is_some_and(|(_, r)| r > MAX_ROWS) {
            return Err(Rejection::new(InvalidCode::Bounds, "COPY destination runs off the grid"));
        }
        if src.overlaps(&target) {
            return Err(Rejection::new(
                InvalidCode::Semantic,
                "COPY source and destination overlap",
            ));
        }
        Ok(())
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let src_range = ctx.action.nth_range(0).expect("signature checked");
        let dst_range = ctx.action.nth_range(1).expect("signature checked");
        let src = resolve(ctx.wb, src_range)?;
        let target = copy_target(ctx.wb, &src, dst_range)?;
        let values: Vec<(CellAddress, CellValue)> = {
            let sheet = ctx.wb.sheet(&src.sheet)?;
            src.addresses()
                .into_iter()
                .map(|a| {
                    let to = CellAddress::new(
                        target.cols.0 + (a.col - src.cols.0),
                        dst_range.start.row + (a.row - src.rows.expect("nonempty").0),
                    );
                    (to, sheet.get(a).clone())
                })
                .collect()
        };
        for (addr, value) in values {
            ctx.wb.set_cell(&target.sheet, addr, value)?;
        }
        Ok(None)
    }
}
