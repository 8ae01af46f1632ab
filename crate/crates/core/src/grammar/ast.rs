use std::fmt;

use crate::address::Range;
use crate::value::{CellValue, Date};

/// The closed set of action verbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verb {
    Select,
    Set,
    Delete,
    DeleteRows,
    InsertRows,
    InsertCols,
    DeleteCols,
    Sort,
    Copy,
    Aggregate,
}

impl Verb {
    pub const ALL: [Verb; 10] = [
        Verb::Select,
        Verb::Set,
        Verb::Delete,
        Verb::DeleteRows,
        Verb::InsertRows,
        Verb::InsertCols,
        Verb::DeleteCols,
        Verb::Sort,
        Verb::Copy,
        Verb::Aggregate,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Verb::Select => "SELECT",
            Verb::Set => "SET",
            Verb::Delete => "DELETE",
            Verb::DeleteRows => "DELETE_ROWS",
            Verb::InsertRows => "INSERT_ROWS",
            Verb::InsertCols => "INSERT_COLS",
            Verb::DeleteCols => "DELETE_COLS",
            Verb::Sort => "SORT",
            Verb::Copy => "COPY",
            Verb::Aggregate => "AGGREGATE",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Verb> {
        Verb::ALL.into_iter().find(|v| v.keyword() == word)
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A literal operand: everything a cell can hold except formulas and Empty.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Text(String),
    Number(f64),
    Bool(bool),
    Date(Date),
}

impl Literal {
    pub fn to_cell(&self) -> CellValue {
        match self {
            Literal::Text(s) => CellValue::Text(s.clone()).normalized(),
            Literal::Number(n) => CellValue::Number(*n),
            Literal::Bool(b) => CellValue::Bool(*b),
            Literal::Date(d) => CellValue::Date(d.clone()),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Literal::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Literal::Number(n) => Some(*n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Range(Range),
    Literal(Literal),
    Named { key: String, value: Literal },
}

impl Arg {
    pub fn as_range(&self) -> Option<&Range> {
        match self {
            Arg::Range(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Filter evaluated per cell. `And`/`Or` always hold at least two children.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Not(Box<Condition>),
    Cmp(CmpOp, Literal),
    Matches(String),
    IsEmpty,
}

impl Condition {
    /// Regex sources in evaluation order.
    pub fn patterns(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |c| {
            if let Condition::Matches(p) = c {
                out.push(p.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Condition)) {
        f(self);
        match self {
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.walk(f)),
            Condition::Not(c) => c.walk(f),
            _ => {}
        }
    }
}

/// One spreadsheet command: a verb, its arguments and an optional filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub verb: Verb,
    pub args: Vec<Arg>,
    pub cond: Option<Condition>,
}

impl Action {
    pub fn positional(&self) -> impl Iterator<Item = &Arg> {
        self.args.iter().filter(|a| !matches!(a, Arg::Named { .. }))
    }

    pub fn nth_range(&self, n: usize) -> Option<&Range> {
        self.positional().nth(n).and_then(Arg::as_range)
    }

    pub fn nth_literal(&self, n: usize) -> Option<&Literal> {
        match self.positional().nth(n) {
            Some(Arg::Literal(l)) => Some(l),
            _ => None,
        }
    }

    pub fn named(&self, key: &str) -> Option<&Literal> {
        self.args.iter().find_map(|a| match a {
            Arg::Named { key: k, value } if k == key => Some(value),
            _ => None,
        })
    }

    pub fn ranges(&self) -> impl Iterator<Item = &Range> {
        self.args.iter().filter_map(Arg::as_range)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::printer::serialize_action(self))
    }
}
