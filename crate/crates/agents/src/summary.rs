//! Human-readable account of what an instruction changed.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sheetmind_core::{column_letters, Action, SheetDiff, StructuralKind, Verb};
use sheetmind_llm::ChatBackend;

use crate::templates;

pub const NO_CHANGES: &str = "No changes were made.";

/// One executed action with its effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryItem {
    /// Canonical action text, when known.
    pub action: Option<String>,
    pub diff: SheetDiff,
    #[serde(default)]
    pub selected: Option<usize>,
}

impl SummaryItem {
    pub fn from_diff(diff: SheetDiff) -> Self {
        SummaryItem {
            action: None,
            diff,
            selected: None,
        }
    }
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("1 {word}")
    } else {
        format!("{n} {word}s")
    }
}

/// Columns touched by the diff's cell changes, e.g. `E` or `A, B`. Cells on
/// more than one sheet are prefixed with their sheet name.
fn columns(diff: &SheetDiff) -> String {
    let sheets: BTreeSet<&str> = diff.cell_changes.iter().map(|c| c.sheet.as_str()).collect();
    let cols: BTreeSet<(&str, u32)> = diff
        .cell_changes
        .iter()
        .map(|c| (c.sheet.as_str(), c.addr.col))
        .collect();
    cols.into_iter()
        .map(|(s, c)| {
            if sheets.len() > 1 {
                format!("{s}!{}", column_letters(c))
            } else {
                column_letters(c)
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn structural(diff: &SheetDiff, kind: StructuralKind) -> usize {
    diff.structural_changes
        .iter()
        .filter(|s| s.kind == kind)
        .map(|s| s.count as usize)
        .sum()
}

fn clause(item: &SummaryItem) -> Option<String> {
    let d = &item.diff;
    let action = item.action.as_deref().and_then(|t| sheetmind_core::parse_action(t).ok());
    let cells = d.cell_changes.len();
    if let (Some(a), Some(n)) = (&action, item.selected) {
        if a.verb == Verb::Select {
            return Some(format!("selected {}", plural(n, "cell")));
        }
    }
    if d.is_empty() {
        return None;
    }
    let Some(a) = action else {
        return Some(format!("changed {} in {}", plural(cells, "cell"), columns(d)));
    };
    let text = match a.verb {
        Verb::Delete => format!("cleared {} in {}", plural(cells, "cell"), columns(d)),
        Verb::Set => format!("set {} in {}", plural(cells, "cell"), columns(d)),
        Verb::DeleteRows => format!("deleted {}", plural(structural(d, StructuralKind::RowsDeleted), "row")),
        Verb::InsertRows => format!("inserted {}", plural(structural(d, StructuralKind::RowsInserted), "row")),
        Verb::InsertCols => format!("inserted {}", plural(structural(d, StructuralKind::ColsInserted), "column")),
        Verb::DeleteCols => format!("deleted {}", plural(structural(d, StructuralKind::ColsDeleted), "column")),
        Verb::Sort => sort_clause(&a),
        Verb::Copy => format!("copied {} to {}", plural(cells, "cell"), range_text(&a, 1)),
        Verb::Aggregate => format!(
            "wrote the {} of {} to {}",
            a.named("fn").and_then(|l| l.as_text()).unwrap_or("result"),
            range_text(&a, 0),
            range_text(&a, 1)
        ),
        Verb::Select => format!("changed {} in {}", plural(cells, "cell"), columns(d)),
    };
    Some(text)
}

fn range_text(a: &Action, n: usize) -> String {
    a.nth_range(n).map(|r| r.to_string()).unwrap_or_default()
}

fn sort_clause(a: &Action) -> String {
    let key = a.named("key").and_then(|l| l.as_text()).unwrap_or("?");
    let order = match a.named("order").and_then(|l| l.as_text()) {
        Some("DESC") => "descending",
        _ => "ascending",
    };
    format!("sorted {} by {key} {order}", range_text(a, 0))
}

/// Deterministic summary built from counts in the diffs.
pub fn template_summary(items: &[SummaryItem]) -> String {
    let clauses: Vec<String> = items.iter().filter_map(clause).collect();
    if clauses.is_empty() {
        return NO_CHANGES.to_string();
    }
    let joined = clauses.join("; ");
    let mut chars = joined.chars();
    let first = chars.next().map(|c| c.to_uppercase().collect::<String>()).unwrap_or_default();
    format!("{first}{}.", chars.as_str())
}

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?").unwrap());

/// Numbers in order of appearance, sorted, so rephrasing may reorder them.
fn numbers(text: &str) -> Vec<String> {
    let mut out: Vec<String> = NUMBER.find_iter(text).map(|m| m.as_str().to_string()).collect();
    out.sort();
    out
}

/// A polished summary is kept only when it carries exactly the template's
/// numbers.
pub fn accept_polish(template: &str, polished: &str) -> bool {
    let p = polished.trim();
    !p.is_empty() && numbers(template) == numbers(p)
}

/// Template summary, optionally rephrased by the backend. Any backend
/// failure or count mismatch falls back to the template.
pub fn summarize(items: &[SummaryItem], backend: Option<&dyn ChatBackend>) -> String {
    let base = template_summary(items);
    let Some(backend) = backend else { return base };
    let convo = templates::conversation(templates::SUMMARY, &[("summary", &base)]);
    match backend.complete(&convo) {
        Ok(reply) if accept_polish(&base, &reply.content) => reply.content.trim().to_string(),
        Ok(reply) => {
            tracing::debug!(polished = %reply.content, "polished summary changed the counts; using template");
            base
        }
        Err(e) => {
            tracing::debug!(error = %e, "summary polish failed; using template");
            base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accept_requires_same_numbers() {
        assert!(accept_polish("Cleared 2 cells in E.", "Two... no: 2 cells were cleared in E."));
        assert!(!accept_polish("Cleared 2 cells in E.", "Cleared some cells in E."));
        assert!(!accept_polish("Cleared 2 cells in E.", "Cleared 3 cells in E."));
        assert!(!accept_polish("Cleared 2 cells in E.", "  "));
    }

    #[test]
    fn empty_list() {
        assert_eq!(template_summary(&[]), NO_CHANGES);
    }
}
