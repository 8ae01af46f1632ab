//! Two-stage checks around execution.
//!
//! Before: the static validator, then a judge prompt. After: the empty-diff
//! rule, then a judge prompt over the observed changes.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use sheetmind_core::{
    serialize_action, validate_static, Action, ExecutionResult, InvalidCode, SheetChange, Verb, Verdict, Workbook,
};
use sheetmind_llm::{BackendError, ChatBackend};

use crate::ask::ask;
use crate::context::extract_context;
use crate::manager::Subtask;
use crate::templates;

pub const JUDGE_UNPARSEABLE: &str = "judge-unparseable";
pub const NO_CHANGE: &str = "no change detected";
const DIFF_LINES: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "text", rename_all = "snake_case")]
pub enum PostVerdict {
    Ok,
    Retry(String),
    Escalate(String),
}

/// Leading keyword of the first non-blank line, upper-cased, and the rest of
/// that line with separators trimmed.
fn keyword(reply: &str) -> Option<(String, String)> {
    let line = reply.lines().map(str::trim).find(|l| !l.is_empty())?;
    let line = line.trim_start_matches(|c: char| !c.is_alphanumeric());
    let end = line.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(line.len());
    if end == 0 {
        return None;
    }
    let rest = line[end..]
        .trim_start_matches(|c: char| c.is_whitespace() || matches!(c, ':' | '-' | '*' | '.' | ','))
        .trim()
        .trim_end_matches('*')
        .trim();
    Some((line[..end].to_ascii_uppercase(), rest.to_string()))
}

pub fn parse_pre_judge(reply: &str) -> Result<Verdict, String> {
    match keyword(reply) {
        Some((k, _)) if k == "VALID" => Ok(Verdict::Valid),
        Some((k, reason)) if k == "INVALID" => Ok(Verdict::invalid(
            InvalidCode::Semantic,
            if reason.is_empty() { "judge rejected the action".into() } else { reason },
        )),
        _ => Err("expected a reply starting with VALID or INVALID".into()),
    }
}

pub fn parse_post_judge(reply: &str) -> Result<PostVerdict, String> {
    let or = |text: String, fallback: &str| if text.is_empty() { fallback.to_string() } else { text };
    match keyword(reply) {
        Some((k, _)) if k == "OK" => Ok(PostVerdict::Ok),
        Some((k, text)) if k == "RETRY" => Ok(PostVerdict::Retry(or(text, "judge asked for a retry"))),
        Some((k, text)) if k == "ESCALATE" => Ok(PostVerdict::Escalate(or(text, "judge escalated the subtask"))),
        _ => Err("expected a reply starting with OK, RETRY or ESCALATE".into()),
    }
}

fn judge_correction(keywords: &'static str) -> impl Fn(&str) -> String {
    move |_| format!("Answer on the first line with {keywords}, optionally followed by a colon and a reason.")
}

pub fn reflect_pre(t: &Subtask, a: &Action, wb: &Workbook, backend: &dyn ChatBackend) -> Result<Verdict, BackendError> {
    let verdict = validate_static(a, wb);
    if !verdict.is_valid() {
        return Ok(verdict);
    }
    let context = extract_context(wb).render();
    let action = serialize_action(a);
    let convo = templates::conversation(
        templates::JUDGE_PRE,
        &[("context", &context), ("subtask", &t.description), ("action", &action)],
    );
    let asked = ask(backend, convo, 1, parse_pre_judge, judge_correction("VALID or INVALID"))?;
    Ok(asked
        .parsed
        .unwrap_or_else(|_| Verdict::invalid(InvalidCode::Semantic, JUDGE_UNPARSEABLE)))
}

/// Human-readable account of an execution result for the post-check judge.
pub fn describe_result(result: &ExecutionResult) -> String {
    let d = &result.diff;
    let mut out = String::new();
    if let Some(sel) = &result.selection {
        let _ = writeln!(out, "Selected {} cell(s).", sel.len());
    }
    if d.is_empty() {
        out.push_str("No cells changed.");
        return out;
    }
    for s in &d.sheet_changes {
        match s {
            SheetChange::SheetAdded { name, index } => {
                let _ = writeln!(out, "Sheet {name} added at position {index}.");
            }
            SheetChange::SheetRemoved { name } => {
                let _ = writeln!(out, "Sheet {name} removed.");
            }
        }
    }
    for s in &d.structural_changes {
        let what = serde_json::to_value(s.kind).ok().and_then(|v| v.as_str().map(str::to_string));
        let _ = writeln!(
            out,
            "{} on {}: {} starting at {}.",
            what.unwrap_or_default().replace('_', " "),
            s.sheet,
            s.count,
            s.at
        );
    }
    if !d.cell_changes.is_empty() {
        let _ = writeln!(out, "{} cell(s) changed:", d.cell_changes.len());
        for c in d.cell_changes.iter().take(DIFF_LINES) {
            let _ = writeln!(out, "{}!{}: {} -> {}", c.sheet, c.addr, show(&c.before), show(&c.after));
        }
        if d.cell_changes.len() > DIFF_LINES {
            let _ = writeln!(out, "... and {} more", d.cell_changes.len() - DIFF_LINES);
        }
    }
    if let Some(a) = d.active {
        let _ = writeln!(out, "Active sheet changed from #{} to #{}.", a.before + 1, a.after + 1);
    }
    out.trim_end().to_string()
}

fn show(v: &sheetmind_core::CellValue) -> String {
    if v.is_empty() {
        "(empty)".into()
    } else {
        format!("{:?}", v.render())
    }
}

pub fn reflect_post(
    t: &Subtask,
    a: &Action,
    result: &ExecutionResult,
    backend: &dyn ChatBackend,
) -> Result<PostVerdict, BackendError> {
    if a.verb != Verb::Select && result.diff.is_empty() {
        return Ok(PostVerdict::Retry(NO_CHANGE.into()));
    }
    let action = serialize_action(a);
    let changes = describe_result(result);
    let convo = templates::conversation(
        templates::JUDGE_POST,
        &[("subtask", &t.description), ("action", &action), ("changes", &changes)],
    );
    let asked = ask(backend, convo, 1, parse_post_judge, judge_correction("OK, RETRY or ESCALATE"))?;
    Ok(asked.parsed.unwrap_or_else(|_| PostVerdict::Retry(JUDGE_UNPARSEABLE.into())))
}
