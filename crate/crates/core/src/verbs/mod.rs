//! One handler per verb, registered by keyword.
//!
//! Each [`VerbHandler`] owns its verb's signature, its semantic checks and
//! its execution. Semantics:
//!
//! | verb | effect |
//! |------|--------|
//! | `SELECT(range)[cond]` | lists cells satisfying `cond` (non-empty cells without `cond`); never mutates |
//! | `SET(range, literal)[cond]` | writes the literal into every cell satisfying `cond` |
//! | `DELETE(range)[cond]` | clears every cell satisfying `cond` |
//! | `DELETE_ROWS(col) WHERE cond` | removes whole rows whose cell in the one-column range satisfies `cond`, bottom-up |
//! | `INSERT_ROWS(at, count=n)` | inserts `n` (default 1) empty rows before row `at` of the active sheet |
//! | `INSERT_COLS(at, count=n)` | inserts `n` empty columns before column `at` of the active sheet |
//! | `DELETE_COLS(cols)` | removes the whole columns named by a column range such as `B:C` |
//! | `SORT(range, key=COL, order=ASC\|DESC)` | stable sort of the range's rows by column `COL`; empties last |
//! | `COPY(src, dst)` | copies the source block to the block anchored at cell `dst`, overwriting it |
//! | `AGGREGATE(src, dst, fn=F)[cond]` | writes SUM/AVG/MIN/MAX over numbers or COUNT of non-empty cells to `dst` |
//!
//! Open-bottom ranges resolve against the sheet's used rows at execution
//! time. A condition that selects nothing makes every verb a no-op.

mod aggregate;
mod content;
mod reorder;
mod structure;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::address::{CellAddress, Range};
use crate::error::SheetError;
use crate::exec::{CompiledCondition, ExecError, SelectedCell};
use crate::grammar::{Action, Arg, Literal, Verb};
use crate::validate::InvalidCode;
use crate::workbook::Workbook;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Range,
    Literal,
    Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedKind {
    Number,
    Column,
    OneOf(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct NamedParam {
    pub key: &'static str,
    pub kind: NamedKind,
    pub required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondPolicy {
    Forbidden,
    Optional,
    Required,
}

#[derive(Debug, Clone, Copy)]
pub struct Signature {
    pub positional: &'static [ParamKind],
    pub named: &'static [NamedParam],
    pub cond: CondPolicy,
}

impl Signature {
    /// Human-readable call shape, e.g. `SORT(range, key=COLUMN[, order=ASC|DESC])`.
    pub fn render(&self, verb: Verb) -> String {
        let mut parts: Vec<String> = self
            .positional
            .iter()
            .map(|k| match k {
                ParamKind::Range => "range".to_string(),
                ParamKind::Literal => "literal".to_string(),
                ParamKind::Number => "number".to_string(),
            })
            .collect();
        let mut optional = String::new();
        for p in self.named {
            let value = match p.kind {
                NamedKind::Number => "number".to_string(),
                NamedKind::Column => "COLUMN".to_string(),
                NamedKind::OneOf(words) => words.join("|"),
            };
            if p.required {
                parts.push(format!("{}={value}", p.key));
            } else {
                optional.push_str(&format!("[, {}={value}]", p.key));
            }
        }
        let cond = match self.cond {
            CondPolicy::Forbidden => "",
            CondPolicy::Optional => " [WHERE cond]",
            CondPolicy::Required => " WHERE cond",
        };
        format!("{}({}{optional}){cond}", verb.keyword(), parts.join(", "))
    }
}

/// A reason an action cannot run against a workbook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub code: InvalidCode,
    pub reason: String,
}

impl Rejection {
    pub fn new(code: InvalidCode, reason: impl Into<String>) -> Rejection {
        Rejection {
            code,
            reason: reason.into(),
        }
    }
}

pub struct ExecContext<'a> {
    pub wb: &'a mut Workbook,
    pub action: &'a Action,
    pub cond: Option<&'a CompiledCondition>,
}

impl ExecContext<'_> {
    pub fn matches(&self, value: &crate::value::CellValue) -> bool {
        self.cond.is_none_or(|c| c.eval(value))
    }
}

/// Strategy interface implemented by every verb.
pub trait VerbHandler: Send + Sync {
    fn verb(&self) -> Verb;

    fn signature(&self) -> &'static Signature;

    /// Whether a successful run is expected to change the workbook.
    fn mutates(&self) -> bool {
        true
    }

    /// Verb-specific checks run after signature, sheet and bounds checks.
    fn check(&self, _action: &Action, _wb: &Workbook) -> Result<(), Rejection> {
        Ok(())
    }

    /// Applies the action. Returns the selection for reading verbs.
    fn execute(&self, ctx: &mut ExecContext<'_>) -> Result<Option<Vec<SelectedCell>>, ExecError>;
}

/// Verb handlers keyed by keyword.
pub struct VerbRegistry {
    handlers: BTreeMap<&'static str, Box<dyn VerbHandler>>,
}

impl VerbRegistry {
    pub fn empty() -> Self {
        VerbRegistry {
            handlers: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = VerbRegistry::empty();
        r.register(Box::new(content::Select));
        r.register(Box::new(content::SetValue));
        r.register(Box::new(content::Clear));
        r.register(Box::new(structure::DeleteRows));
        r.register(Box::new(structure::InsertRows));
        r.register(Box::new(structure::InsertCols));
        r.register(Box::new(structure::DeleteCols));
        r.register(Box::new(reorder::Sort));
        r.register(Box::new(reorder::Copy));
        r.register(Box::new(aggregate::Aggregate));
        r
    }

    pub fn register(&mut self, handler: Box<dyn VerbHandler>) {
        self.handlers.insert(handler.verb().keyword(), handler);
    }

    pub fn by_keyword(&self, keyword: &str) -> Option<&dyn VerbHandler> {
        self.handlers.get(keyword).map(|h| h.as_ref())
    }

    pub fn get(&self, verb: Verb) -> &dyn VerbHandler {
        self.by_keyword(verb.keyword())
            .unwrap_or_else(|| panic!("no handler registered for {verb}"))
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn VerbHandler> {
        self.handlers.values().map(|h| h.as_ref())
    }

    /// Checks argument count, kinds, named keys and condition policy.
    pub fn check_signature(&self, action: &Action) -> Result<(), String> {
        let verb = action.verb;
        let handler = self
            .by_keyword(verb.keyword())
            .ok_or_else(|| format!("no handler for {verb}"))?;
        let sig = handler.signature();
        let shape = sig.render(verb);

        let positional: Vec<&Arg> = action.positional().collect();
        if positional.len() != sig.positional.len() {
            return Err(format!(
                "{verb} takes {} positional argument(s), got {}; usage: {shape}",
                sig.positional.len(),
                positional.len()
            ));
        }
        for (i, (arg, kind)) in positional.iter().zip(sig.positional).enumerate() {
            let ok = matches!(
                (kind, arg),
                (ParamKind::Range, Arg::Range(_))
                    | (ParamKind::Literal, Arg::Literal(_))
                    | (ParamKind::Number, Arg::Literal(Literal::Number(_)))
            );
            if !ok {
                return Err(format!("{verb} argument {} has the wrong kind; usage: {shape}", i + 1));
            }
        }

        let mut seen: Vec<&str> = Vec::new();
        for arg in &action.args {
            let Arg::Named { key, value } = arg else { continue };
            let param = sig
                .named
                .iter()
                .find(|p| p.key == key)
                .ok_or_else(|| format!("{verb} has no parameter {key:?}; usage: {shape}"))?;
            if seen.contains(&key.as_str()) {
                return Err(format!("duplicate parameter {key:?}"));
            }
            seen.push(key);
            let ok = match (param.kind, value) {
                (NamedKind::Number, Literal::Number(_)) => true,
                (NamedKind::Column, Literal::Text(_)) => true,
                (NamedKind::OneOf(words), Literal::Text(t)) => words.contains(&t.as_str()),
                _ => false,
            };
            if !ok {
                return Err(format!("bad value for {key}; usage: {shape}"));
            }
        }
        if let Some(missing) = sig.named.iter().find(|p| p.required && !seen.contains(&p.key)) {
            return Err(format!("{verb} requires {}=...; usage: {shape}", missing.key));
        }

        match (sig.cond, &action.cond) {
            (CondPolicy::Forbidden, Some(_)) => Err(format!("{verb} does not take WHERE; usage: {shape}")),
            (CondPolicy::Required, None) => Err(format!("{verb} requires WHERE; usage: {shape}")),
            _ => Ok(()),
        }
    }
}

/// The process-wide standard registry.
pub fn registry() -> &'static VerbRegistry {
    static REGISTRY: OnceLock<VerbRegistry> = OnceLock::new();
    REGISTRY.get_or_init(VerbRegistry::standard)
}

/// A range resolved against a concrete sheet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub sheet: String,
    pub cols: (u32, u32),
    /// `None` when an open-bottom range covers no used rows.
    pub rows: Option<(u32, u32)>,
}

impl Block {
    pub fn addresses(&self) -> Vec<CellAddress> {
        let Some((r1, r2)) = self.rows else {
            return Vec::new();
        };
        let (c1, c2) = self.cols;
        (r1..=r2)
            .flat_map(|r| (c1..=c2).map(move |c| CellAddress::new(c, r)))
            .collect()
    }

    pub fn height(&self) -> u32 {
        self.rows.map_or(0, |(a, b)| b - a + 1)
    }

    pub fn width(&self) -> u32 {
        self.cols.1 - self.cols.0 + 1
    }

    pub fn overlaps(&self, other: &Block) -> bool {
        let (Some(a), Some(b)) = (self.rows, other.rows) else {
            return false;
        };
        self.sheet == other.sheet
            && self.cols.0 <= other.cols.1
            && other.cols.0 <= self.cols.1
            && a.0 <= b.1
            && b.0 <= a.1
    }
}

pub fn resolve(wb: &Workbook, range: &Range) -> Result<Block, SheetError> {
    let sheet = wb.resolve_sheet(range.sheet.as_deref())?;
    Ok(Block {
        sheet: sheet.name().to_string(),
        cols: (range.start.col, range.end_col),
        rows: range.row_span(sheet.used_rows()),
    })
}

/// Block written by COPY: the source's shape anchored at `dst`.
pub(crate) fn copy_target(wb: &Workbook, src: &Block, dst: &Range) -> Result<Block, SheetError> {
    let sheet = wb.resolve_sheet(dst.sheet.as_deref())?;
    Ok(Block {
        sheet: sheet.name().to_string(),
        cols: (dst.start.col, dst.start.col + src.width() - 1),
        rows: src
            .rows
            .map(|_| (dst.start.row, dst.start.row + src.height() - 1)),
    })
}

pub(crate) fn positive_integer(value: f64, what: &str, max: u32) -> Result<u32, Rejection> {
    if value.fract() != 0.0 {
        return Err(Rejection::new(InvalidCode::Semantic, format!("{what} must be a whole number")));
    }
    if value < 1.0 || value > f64::from(max) {
        return Err(Rejection::new(InvalidCode::Bounds, format!("{what} must be between 1 and {max}")));
    }
    Ok(value as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_verb_has_exactly_one_handler() {
        let r = registry();
        assert_eq!(r.iter().count(), Verb::ALL.len());
        for v in Verb::ALL {
            assert_eq!(r.get(v).verb(), v);
        }
    }

    #[test]
    fn signatures_render() {
        let r = registry();
        assert_eq!(r.get(Verb::Sort).signature().render(Verb::Sort), "SORT(range, key=COLUMN[, order=ASC|DESC])");
        assert_eq!(
            r.get(Verb::DeleteRows).signature().render(Verb::DeleteRows),
            "DELETE_ROWS(range) WHERE cond"
        );
        assert_eq!(
            r.get(Verb::Aggregate).signature().render(Verb::Aggregate),
            "AGGREGATE(range, range, fn=SUM|AVG|MIN|MAX|COUNT) [WHERE cond]"
        );
    }
}
