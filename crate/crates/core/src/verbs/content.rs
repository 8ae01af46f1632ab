use crate::exec::{ExecError, SelectedCell};
use crate::grammar::{Action, Verb};
use crate::validate::InvalidCode;
use crate::value::CellValue;
use crate::workbook::Workbook;

use super::{resolve, CondPolicy, ExecContext, ParamKind, Rejection, Signature, VerbHandler};

pub struct Select;

static SELECT_SIG: Signature = Signature {
    positional: &[ParamKind::Range],
    named: &[],
    cond: CondPolicy::Optional,
};

impl VerbHandler for Select {
    fn verb(&self) -> Verb {
        Verb::Select
    }

    fn signature(&self) -> &'static Signature {
        &SELECT_SIG
    }

    fn mutates(&self) -> bool {
        false
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let range = ctx.action.nth_range(0).expect("signature checked");
        let block = resolve(ctx.wb, range)?;
        let sheet = ctx.wb.sheet(&block.sheet)?;
        let mut out = Vec::new();
        for addr in block.addresses() {
            let v = sheet.get(addr);
            let keep = match ctx.cond {
                Some(c) => c.eval(v),
                None => !v.is_empty(),
            };
            if keep {
                out.push(SelectedCell {
                    sheet: block.sheet.clone(),
                    addr,
                    value: v.clone(),
                });
            }
        }
        Ok(Some(out))
    }
}

pub struct SetValue;

static SET_SIG: Signature = Signature {
    positional: &[ParamKind::Range, ParamKind::Literal],
    named: &[],
    cond: CondPolicy::Optional,
};

impl VerbHandler for SetValue {
    fn verb(&self) -> Verb {
        Verb::Set
    }

    fn signature(&self) -> &'static Signature {
        &SET_SIG
    }

    fn check(&self, action: &Action, _wb: &Workbook) -> Result<(), Rejection> {
        let value = action.nth_literal(1).expect("signature checked").to_cell();
        value
            .validate()
            .map_err(|e| Rejection::new(InvalidCode::Semantic, e.to_string()))
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let range = ctx.action.nth_range(0).expect("signature checked");
        let value = ctx.action.nth_literal(1).expect("signature checked").to_cell();
        let block = resolve(ctx.wb, range)?;
        let targets: Vec<_> = {
            let sheet = ctx.wb.sheet(&block.sheet)?;
            block
                .addresses()
                .into_iter()
                .filter(|a| ctx.matches(sheet.get(*a)))
                .collect()
        };
        for addr in targets {
            ctx.wb.set_cell(&block.sheet, addr, value.clone())?;
        }
        Ok(None)
    }
}

/// `DELETE`: clears content, leaving the grid shape alone.
pub struct Clear;

static DELETE_SIG: Signature = Signature {
    positional: &[ParamKind::Range],
    named: &[],
    cond: CondPolicy::Optional,
};

impl VerbHandler for Clear {
    fn verb(&self) -> Verb {
        Verb::Delete
    }

    fn signature(&self) -> &'static Signature {
        &DELETE_SIG
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let range = ctx.action.nth_range(0).expect("signature checked");
        let block = resolve(ctx.wb, range)?;
        let targets: Vec<_> = {
            let sheet = ctx.wb.sheet(&block.sheet)?;
            sheet
                .cells()
                .map(|(a, _)| a)
                .filter(|a| {
                    block.rows.is_some_and(|(r1, r2)| (r1..=r2).contains(&a.row))
                        && (block.cols.0..=block.cols.1).contains(&a.col)
                })
                .filter(|a| ctx.matches(sheet.get(*a)))
                .collect()
        };
        for addr in targets {
            ctx.wb.set_cell(&block.sheet, addr, CellValue::Empty)?;
        }
        Ok(None)
    }
}
