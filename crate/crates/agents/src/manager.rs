//! Decomposes an instruction into ordered subtasks.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sheetmind_llm::ChatBackend;

use crate::ask::ask;
use crate::context::SheetContext;
use crate::error::AgentError;
use crate::templates;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub text: String,
    pub context: SheetContext,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtask {
    pub index: usize,
    pub description: String,
    #[serde(default)]
    pub depends_on: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub subtasks: Vec<Subtask>,
    pub raw: String,
}

static NUMBERED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(\d{1,4})\s*[.)]\s*(.*)$").unwrap());
static AFTER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\[\s*after\s*([^\]]*)\]").unwrap());
static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+").unwrap());

/// Parses numbered lines (`1. ...`, `2) ...`) with optional `[after k]`
/// tags. Lines that are not numbered are ignored.
pub fn parse_plan(reply: &str) -> Result<Vec<Subtask>, String> {
    let mut subtasks = Vec::new();
    for line in reply.lines() {
        let Some(caps) = NUMBERED.captures(line) else { continue };
        let index: usize = caps[1].parse().map_err(|_| format!("bad subtask number {:?}", &caps[1]))?;
        let expected = subtasks.len() + 1;
        if index != expected {
            return Err(format!("expected subtask {expected}, found {index}"));
        }
        let body = &caps[2];
        let mut depends_on = Vec::new();
        for tag in AFTER.captures_iter(body) {
            let nums: Vec<&str> = NUMBER.find_iter(&tag[1]).map(|m| m.as_str()).collect();
            if nums.is_empty() {
                return Err(format!("subtask {index} has an [after] tag without a number"));
            }
            for n in nums {
                let k: usize = n.parse().map_err(|_| format!("bad dependency {n:?}"))?;
                if k == 0 || k >= index {
                    return Err(format!("subtask {index} can only depend on earlier subtasks, not {k}"));
                }
                if !depends_on.contains(&k) {
                    depends_on.push(k);
                }
            }
        }
        depends_on.sort_unstable();
        let description = AFTER.replace_all(body, "").split_whitespace().collect::<Vec<_>>().join(" ");
        if description.is_empty() {
            return Err(format!("subtask {index} has no description"));
        }
        subtasks.push(Subtask {
            index,
            description,
            depends_on,
        });
    }
    if subtasks.is_empty() {
        return Err("no numbered subtasks found".into());
    }
    Ok(subtasks)
}

fn correction(error: &str) -> String {
    format!(
        "Your reply could not be read as a plan: {error}. Reply with numbered lines only, \
         starting at 1, for example:\n1. <subtask>\n2. <subtask> [after 1]"
    )
}

fn request(instr: &Instruction, notes: &str, backend: &dyn ChatBackend) -> Result<Plan, AgentError> {
    let context = instr.context.render();
    let convo = templates::conversation(
        templates::MANAGER,
        &[("context", &context), ("instruction", &instr.text), ("notes", notes)],
    );
    let asked = ask(backend, convo, 1, parse_plan, correction)?;
    match asked.parsed {
        Ok(subtasks) => Ok(Plan {
            subtasks,
            raw: asked.raw,
        }),
        Err(reason) => Err(AgentError::PlanningFailure { reason, raw: asked.raw }),
    }
}

pub fn manager_plan(instr: &Instruction, backend: &dyn ChatBackend) -> Result<Plan, AgentError> {
    request(instr, "", backend)
}

/// Asks for a fresh plan covering the failed subtask and everything after it.
/// Subtasks in the returned plan are numbered from 1.
pub fn manager_reformulate(
    instr: &Instruction,
    failed: &Subtask,
    reason: &str,
    remaining: &[Subtask],
    backend: &dyn ChatBackend,
) -> Result<Plan, AgentError> {
    let mut notes = format!(
        "\nReformulate the remaining work. Subtask \"{}\" could not be completed: {reason}",
        failed.description
    );
    if !remaining.is_empty() {
        notes.push_str("\nStill to do after it:");
        for t in remaining {
            notes.push_str(&format!("\n- {}", t.description));
        }
    }
    notes.push_str("\nEarlier subtasks are already done; plan only what is left.\n");
    request(instr, &notes, backend)
}
