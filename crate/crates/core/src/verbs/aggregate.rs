use crate::exec::{ExecError, SelectedCell};
use crate::grammar::{Action, Verb};
use crate::validate::InvalidCode;
use crate::value::CellValue;
use crate::workbook::Workbook;

use super::{
    resolve, CondPolicy, ExecContext, NamedKind, NamedParam, ParamKind, Rejection, Signature,
    VerbHandler,
};

pub struct Aggregate;

static AGG_PARAMS: [NamedParam; 1] = [NamedParam {
    key: "fn",
    kind: NamedKind::OneOf(&["SUM", "AVG", "MIN", "MAX", "COUNT"]),
    required: true,
}];

static AGG_SIG: Signature = Signature {
    positional: &[ParamKind::Range, ParamKind::Range],
    named: &AGG_PARAMS,
    cond: CondPolicy::Optional,
};

/// Folds qualifying cells. SUM/AVG/MIN/MAX look only at numbers; COUNT
/// counts non-empty cells. AVG, MIN and MAX of no numbers are Empty.
pub fn fold(function: &str, values: &[&CellValue]) -> CellValue {
    let numbers: Vec<f64> = values
        .iter()
        .filter_map(|v| match v {
            CellValue::Number(n) => Some(*n),
            _ => None,
        })
        .collect();
    match function {
        "SUM" => CellValue::Number(numbers.iter().sum()),
        "AVG" if numbers.is_empty() => CellValue::Empty,
        "AVG" => CellValue::Number(numbers.iter().sum::<f64>() / numbers.len() as f64),
        "MIN" => numbers.iter().copied().reduce(f64::min).map_or(CellValue::Empty, CellValue::Number),
        "MAX" => numbers.iter().copied().reduce(f64::max).map_or(CellValue::Empty, CellValue::Number),
        "COUNT" => CellValue::Number(values.iter().filter(|v| !v.is_empty()).count() as f64),
        other => unreachable!("signature admits no function {other}"),
    }
}

impl VerbHandler for Aggregate {
    fn verb(&self) -> Verb {
        Verb::Aggregate
    }

    fn signature(&self) -> &'static Signature {
        &AGG_SIG
    }

    fn check(&self, action: &Action, _wb: &Workbook) -> Result<(), Rejection> {
        let dst = action.nth_range(1).expect("signature checked");
        if !dst.is_single_cell() {
            return Err(Rejection::new(
                InvalidCode::Semantic,
                "AGGREGATE destination must be a single cell",
            ));
        }
        Ok(())
    }

    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError> {
        let src = ctx.action.nth_range(0).expect("signature checked");
        let dst = ctx.action.nth_range(1).expect("signature checked");
        let function = ctx
            .action
            .named("fn")
            .and_then(|l| l.as_text())
            .expect("signature checked")
            .to_string();
        let block = resolve(ctx.wb, src)?;
        let result = {
            let sheet = ctx.wb.sheet(&block.sheet)?;
            let qualifying: Vec<&CellValue> = block
                .addresses()
                .into_iter()
                .map(|a| sheet.get(a))
                .filter(|v| ctx.matches(v))
                .collect();
            if qualifying.is_empty() {
                return Ok(None);
            }
            fold(&function, &qualifying)
        };
        if let CellValue::Number(n) = result {
            if !n.is_finite() {
                return Err(ExecError::Overflow(format!("{function} overflowed")));
            }
        }
        ctx.wb.set_cell_in(dst.sheet.as_deref(), dst.start, result)?;
        Ok(None)
    }
}
