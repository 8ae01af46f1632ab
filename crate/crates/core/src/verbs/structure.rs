use crate::address::{MAX_COLS, MAX_ROWS};
use crate::exec::{ExecError, SelectedCell};
use crate::grammar::{Action, Verb};
use crate::validate::InvalidCode;
use crate::workbook::Workbook;

use super::{
    positive_integer, resolve, CondPolicy, ExecContext, NamedKind, NamedParam, ParamKind,
    Rejection, Signature, VerbHandler,
};

pub struct DeleteRows;

static DELETE_ROWS_SIG: Signature = Signature {
    positional: &[ParamKind::Range],
    named: &[],
    cond: CondPolicy::Required,
};

impl VerbHandler for DeleteRows {
    fn verb(&self) -> Verb {
        Verb::DeleteRows
    }

    fn signature(&self) -> &'static Signature {
        &DELETE_ROWS_SIG
    }

    fn check(&self, action: &Action, _wb: &Workbook) -> Result<(), Rejection> {
        let range = action.nth_range(0).expect("signature checked");
        if range.width() != 1 {
            return Err(Rejection::new(
                InvalidCode::Semantic,
                "DELETE_ROWS tests one column; use a single-column range such as E:E",
            ));
        }
        Ok(())
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let range = ctx.action.nth_range(0).expect("signature checked");
        let block = resolve(ctx.wb, range)?;
        let Some((r1, r2)) = block.rows else {
            return Ok(None);
        };
        let doomed: Vec<u32> = {
            let sheet = ctx.wb.sheet(&block.sheet)?;
            (r1..=r2)
                .filter(|r| ctx.matches(sheet.get(crate::address::CellAddress::new(block.cols.0, *r))))
                .collect()
        };
        // bottom-up, one edit per contiguous run
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for r in doomed {
            match runs.last_mut() {
                Some((start, count)) if *start + *count == r => *count += 1,
                _ => runs.push((r, 1)),
            }
        }
        for (start, count) in runs.into_iter().rev() {
            ctx.wb.delete_rows(Some(&block.sheet), start, count)?;
        }
        Ok(None)
    }
}

static COUNT_PARAM: [NamedParam; 1] = [NamedParam {
    key: "count",
    kind: NamedKind::Number,
    required: false,
}];

static INSERT_SIG: Signature = Signature {
    positional: &[ParamKind::Number],
    named: &COUNT_PARAM,
    cond: CondPolicy::Forbidden,
};

fn insert_args(action: &Action, max: u32) -> Result<(u32, u32), Rejection> {
    let at = action.nth_literal(0).and_then(|l| l.as_number()).expect("signature checked");
    let at = positive_integer(at, "insert position", max)?;
    let count = match action.named("count").and_then(|l| l.as_number()) {
        Some(n) => positive_integer(n, "count", max)?,
        None => 1,
    };
    Ok((at, count))
}

pub struct InsertRows;

impl VerbHandler for InsertRows {
    fn verb(&self) -> Verb {
        Verb::InsertRows
    }

    fn signature(&self) -> &'static Signature {
        &INSERT_SIG
    }

    fn check(&self, action: &Action, wb: &Workbook) -> Result<(), Rejection> {
        let (at, count) = insert_args(action, MAX_ROWS)?;
        let used = wb.active_sheet().used_rows();
        if used >= at && used + count > MAX_ROWS {
            return Err(Rejection::new(
                InvalidCode::Bounds,
                format!("inserting {count} rows would push data past row {MAX_ROWS}"),
            ));
        }
        Ok(())
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let (at, count) = insert_args(ctx.action, MAX_ROWS).map_err(ExecError::from)?;
        ctx.wb.insert_rows(None, at, count)?;
        Ok(None)
    }
}

pub struct InsertCols;

impl VerbHandler for InsertCols {
    fn verb(&self) -> Verb {
        Verb::InsertCols
    }

    fn signature(&self) -> &'static Signature {
        &INSERT_SIG
    }

    fn check(&self, action: &Action, wb: &Workbook) -> Result<(), Rejection> {
        let (at, count) = insert_args(action, MAX_COLS)?;
        let used = wb.active_sheet().used_cols();
        if used >= at && used + count > MAX_COLS {
            return Err(Rejection::new(
                InvalidCode::Bounds,
                format!("inserting {count} columns would push data past column {MAX_COLS}"),
            ));
        }
        Ok(())
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let (at, count) = insert_args(ctx.action, MAX_COLS).map_err(ExecError::from)?;
        ctx.wb.insert_cols(None, at, count)?;
        Ok(None)
    }
}

pub struct DeleteCols;

static DELETE_COLS_SIG: Signature = Signature {
    positional: &[ParamKind::Range],
    named: &[],
    cond: CondPolicy::Forbidden,
};

impl VerbHandler for DeleteCols {
    fn verb(&self) -> Verb {
        Verb::DeleteCols
    }

    fn signature(&self) -> &'static Signature {
        &DELETE_COLS_SIG
    }

    fn check(&self, action: &Action, _wb: &Workbook) -> Result<(), Rejection> {
        let range = action.nth_range(0).expect("signature checked");
        if !range.is_whole_columns() {
            return Err(Rejection::new(
                InvalidCode::Semantic,
                "DELETE_COLS needs whole columns such as B:B or B:D",
            ));
        }
        Ok(())
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let range = ctx.action.nth_range(0).expect("signature checked");
        let sheet = range.sheet.as_deref();
        ctx.wb.delete_cols(sheet, range.start.col, range.width())?;
        Ok(None)
    }
}
