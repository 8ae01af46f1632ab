//! Canonical text form of actions.

use crate::address::format_range;
use crate::value::format_number;

use super::ast::{Action, Arg, Condition, Literal};

pub fn serialize_action(a: &Action) -> String {
    let args: Vec<String> = a.args.iter().map(arg).collect();
    let mut out = format!("{}({})", a.verb.keyword(), args.join(", "));
    if let Some(c) = &a.cond {
        out.push_str(" WHERE ");
        out.push_str(&condition(c));
    }
    out
}

pub fn serialize_script(actions: &[Action]) -> String {
    actions
        .iter()
        .map(serialize_action)
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn literal(l: &Literal) -> String {
    match l {
        Literal::Text(s) => quote(s),
        Literal::Number(n) => format_number(*n),
        Literal::Bool(true) => "TRUE".to_string(),
        Literal::Bool(false) => "FALSE".to_string(),
        Literal::Date(d) => d.to_string(),
    }
}

fn is_bare_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "TRUE"
        && s != "FALSE"
}

fn arg(a: &Arg) -> String {
    match a {
        Arg::Range(r) => format_range(r),
        Arg::Literal(l) => literal(l),
        Arg::Named { key, value } => match value {
            Literal::Text(s) if is_bare_word(s) => format!("{key}={s}"),
            other => format!("{key}={}", literal(other)),
        },
    }
}

fn condition(c: &Condition) -> String {
    match c {
        Condition::IsEmpty => "ISEMPTY".to_string(),
        Condition::Matches(p) => format!("MATCHES({})", quote(p)),
        Condition::Cmp(op, l) => format!("VALUE {} {}", op.symbol(), literal(l)),
        Condition::Not(inner) => match **inner {
            Condition::And(_) | Condition::Or(_) | Condition::Not(_) => {
                format!("NOT ({})", condition(inner))
            }
            _ => format!("NOT {}", condition(inner)),
        },
        Condition::And(cs) => cs
            .iter()
            .map(|c| match c {
                Condition::And(_) | Condition::Or(_) => format!("({})", condition(c)),
                _ => condition(c),
            })
            .collect::<Vec<_>>()
            .join(" AND "),
        Condition::Or(cs) => cs
            .iter()
            .map(|c| match c {
                Condition::Or(_) => format!("({})", condition(c)),
                _ => condition(c),
            })
            .collect::<Vec<_>>()
            .join(" OR "),
    }
}
