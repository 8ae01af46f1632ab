//! Machine-checkable action validation.

use serde::{Deserialize, Serialize};

use crate::exec::compile_regex;
use crate::grammar::{Action, Arg, Condition, Literal};
use crate::verbs::registry;
use crate::workbook::Workbook;

/// Why an action was judged invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidCode {
    Parse,
    Arity,
    Bounds,
    Verb,
    Regex,
    Semantic,
}

impl InvalidCode {
    pub fn as_str(self) -> &'static str {
        match self {
            InvalidCode::Parse => "parse",
            InvalidCode::Arity => "arity",
            InvalidCode::Bounds => "bounds",
            InvalidCode::Verb => "verb",
            InvalidCode::Regex => "regex",
            InvalidCode::Semantic => "semantic",
        }
    }
}

impl std::fmt::Display for InvalidCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid { code: InvalidCode, reason: String },
}

impl Verdict {
    pub fn invalid(code: InvalidCode, reason: impl Into<String>) -> Verdict {
        Verdict::Invalid {
            code,
            reason: reason.into(),
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

fn literals(a: &Action) -> impl Iterator<Item = &Literal> {
    a.args.iter().filter_map(|arg| match arg {
        Arg::Literal(l) | Arg::Named { value: l, .. } => Some(l),
        Arg::Range(_) => None,
    })
}

fn cond_literals<'a>(c: &'a Condition, out: &mut Vec<&'a Literal>) {
    match c {
        Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| cond_literals(c, out)),
        Condition::Not(c) => cond_literals(c, out),
        Condition::Cmp(_, l) => out.push(l),
        Condition::Matches(_) | Condition::IsEmpty => {}
    }
}

fn short_junction(c: &Condition) -> bool {
    match c {
        Condition::And(cs) | Condition::Or(cs) => cs.len() < 2 || cs.iter().any(short_junction),
        Condition::Not(c) => short_junction(c),
        _ => false,
    }
}

/// Checks an action against a workbook without running it. Pure.
pub fn validate_static(a: &Action, wb: &Workbook) -> Verdict {
    let reg = registry();
    let Some(handler) = reg.by_keyword(a.verb.keyword()) else {
        return Verdict::invalid(InvalidCode::Verb, format!("unknown verb {}", a.verb));
    };
    if let Err(reason) = reg.check_signature(a) {
        return Verdict::invalid(InvalidCode::Arity, reason);
    }
    if let Some(cond) = &a.cond {
        if short_junction(cond) {
            return Verdict::invalid(InvalidCode::Semantic, "AND/OR needs at least two operands");
        }
        for p in cond.patterns() {
            if let Err(e) = compile_regex(p) {
                return Verdict::invalid(InvalidCode::Regex, format!("regex {p:?} does not compile: {e}"));
            }
        }
    }
    for r in a.ranges() {
        if let Err(e) = wb.resolve_sheet(r.sheet.as_deref()) {
            return Verdict::invalid(InvalidCode::Bounds, e.to_string());
        }
        if !r.in_bounds() {
            return Verdict::invalid(InvalidCode::Bounds, format!("range {r} lies outside the grid"));
        }
    }
    let mut lits: Vec<&Literal> = literals(a).collect();
    if let Some(c) = &a.cond {
        cond_literals(c, &mut lits);
    }
    if lits
        .iter()
        .any(|l| matches!(l, Literal::Number(n) if !n.is_finite()))
    {
        return Verdict::invalid(InvalidCode::Semantic, "numbers must be finite");
    }
    match handler.check(a, wb) {
        Ok(()) => Verdict::Valid,
        Err(r) => Verdict::Invalid {
            code: r.code,
            reason: r.reason,
        },
    }
}
