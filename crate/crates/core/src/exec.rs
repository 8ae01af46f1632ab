//! The interpreter: applies actions to a workbook and reports diffs.

use std::cmp::Ordering;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::CellAddress;
use crate::diff::{diff, SheetDiff};
use crate::error::SheetError;
use crate::grammar::{Action, CmpOp, Condition, Literal};
use crate::validate::{validate_static, InvalidCode, Verdict};
use crate::value::CellValue;
use crate::verbs::{registry, ExecContext, Rejection};
use crate::workbook::{SheetSnapshot, Workbook};

const REGEX_SIZE_LIMIT: usize = 1 << 20;

/// Compiles a MATCHES pattern. Backreferences and lookaround are rejected
/// by the engine; matching is unanchored search.
pub fn compile_regex(pattern: &str) -> Result<Regex, regex::Error> {
    RegexBuilder::new(pattern)
        .size_limit(REGEX_SIZE_LIMIT)
        .dfa_size_limit(REGEX_SIZE_LIMIT)
        .build()
}

/// A condition with its regexes compiled once.
#[derive(Debug, Clone)]
pub enum CompiledCondition {
    And(Vec<CompiledCondition>),
    Or(Vec<CompiledCondition>),
    Not(Box<CompiledCondition>),
    Cmp(CmpOp, CellValue),
    Matches(Option<Regex>),
    IsEmpty,
}

impl CompiledCondition {
    /// Patterns that fail to compile become never-matching.
    pub fn new(c: &Condition) -> CompiledCondition {
        match c {
            Condition::And(cs) => CompiledCondition::And(cs.iter().map(Self::new).collect()),
            Condition::Or(cs) => CompiledCondition::Or(cs.iter().map(Self::new).collect()),
            Condition::Not(c) => CompiledCondition::Not(Box::new(Self::new(c))),
            Condition::Cmp(op, lit) => CompiledCondition::Cmp(*op, lit.to_cell()),
            Condition::Matches(p) => CompiledCondition::Matches(compile_regex(p).ok()),
            Condition::IsEmpty => CompiledCondition::IsEmpty,
        }
    }

    pub fn eval(&self, v: &CellValue) -> bool {
        match self {
            CompiledCondition::And(cs) => cs.iter().all(|c| c.eval(v)),
            CompiledCondition::Or(cs) => cs.iter().any(|c| c.eval(v)),
            CompiledCondition::Not(c) => !c.eval(v),
            CompiledCondition::Cmp(op, rhs) => compare(*op, v, rhs),
            CompiledCondition::Matches(re) => re.as_ref().is_some_and(|re| re.is_match(&v.render())),
            CompiledCondition::IsEmpty => v.is_empty(),
        }
    }
}

/// Same-type ordering; `None` for mismatched types or incomparable values.
fn typed_cmp(a: &CellValue, b: &CellValue) -> Option<Ordering> {
    match (a, b) {
        (CellValue::Number(x), CellValue::Number(y)) => x.partial_cmp(y),
        (CellValue::Text(x), CellValue::Text(y)) => Some(x.cmp(y)),
        (CellValue::Bool(x), CellValue::Bool(y)) => Some(x.cmp(y)),
        // ISO-8601 text order is chronological
        (CellValue::Date(x), CellValue::Date(y)) => Some(x.as_str().cmp(y.as_str())),
        (CellValue::Formula(x), CellValue::Formula(y)) => Some(x.cmp(y)),
        (CellValue::Empty, CellValue::Empty) => Some(Ordering::Equal),
        _ => None,
    }
}

fn compare(op: CmpOp, cell: &CellValue, lit: &CellValue) -> bool {
    let Some(ord) = typed_cmp(cell, lit) else {
        return false;
    };
    if cell.is_empty() {
        return match op {
            CmpOp::Eq => true,
            CmpOp::Ne => false,
            _ => false,
        };
    }
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

/// Evaluates a condition on one cell. Total: never fails.
pub fn eval_condition(c: &Condition, v: &CellValue) -> bool {
    CompiledCondition::new(c).eval(v)
}

/// Compares a cell to a literal as a `VALUE op literal` condition would.
pub fn compare_literal(op: CmpOp, cell: &CellValue, lit: &Literal) -> bool {
    compare(op, cell, &lit.to_cell())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectedCell {
    pub sheet: String,
    pub addr: CellAddress,
    pub value: CellValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub diff: SheetDiff,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Vec<SelectedCell>>,
    pub mutated: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("action violates its precondition ({code}): {reason}")]
    Precondition { code: InvalidCode, reason: String },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Sheet(#[from] SheetError),
}

impl From<Rejection> for ExecError {
    fn from(r: Rejection) -> Self {
        ExecError::Precondition {
            code: r.code,
            reason: r.reason,
        }
    }
}

/// An execution together with the snapshots taken around it.
#[derive(Debug, Clone)]
pub struct TracedExecution {
    pub result: ExecutionResult,
    pub before: SheetSnapshot,
    pub after: SheetSnapshot,
}

/// Runs a valid action in place and returns its diff.
///
/// The workbook is left untouched when an error is returned.
pub fn execute(wb: &mut Workbook, a: &Action) -> Result<ExecutionResult, ExecError> {
    execute_traced(wb, a).map(|t| t.result)
}

pub fn execute_traced(wb: &mut Workbook, a: &Action) -> Result<TracedExecution, ExecError> {
    if let Verdict::Invalid { code, reason } = validate_static(a, wb) {
        return Err(ExecError::Precondition { code, reason });
    }
    let handler = registry().get(a.verb);
    let cond = a.cond.as_ref().map(CompiledCondition::new);
    let before = wb.snapshot();
    let outcome = {
        let mut ctx = ExecContext {
            wb,
            action: a,
            cond: cond.as_ref(),
        };
        handler.execute(&mut ctx)
    };
    let selection = match outcome {
        Ok(s) => s,
        Err(e) => {
            *wb = before.workbook().clone();
            return Err(e);
        }
    };
    let after = wb.snapshot();
    let d = diff(&before, &after);
    let mutated = !d.is_empty();
    Ok(TracedExecution {
        result: ExecutionResult {
            diff: d,
            selection,
            mutated,
        },
        before,
        after,
    })
}

/// Result of a script: results of the actions that ran, and the first
/// failure with its index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptRun {
    pub results: Vec<ExecutionResult>,
    pub error: Option<(usize, ExecError)>,
}

/// Executes actions in order, stopping at the first error.
pub fn execute_script(wb: &mut Workbook, actions: &[Action]) -> ScriptRun {
    let mut results = Vec::with_capacity(actions.len());
    for (i, a) in actions.iter().enumerate() {
        match execute(wb, a) {
            Ok(r) => results.push(r),
            Err(e) => {
                return ScriptRun {
                    results,
                    error: Some((i, e)),
                }
            }
        }
    }
    ScriptRun {
        results,
        error: None,
    }
}
