//! Turns one subtask into one grammar-valid action.

use sheetmind_core::verbs::registry;
use sheetmind_core::{parse_action, Action, GRAMMAR_EBNF};
use sheetmind_llm::ChatBackend;

use crate::ask::ask;
use crate::context::SheetContext;
use crate::error::AgentError;
use crate::manager::Subtask;
use crate::templates;

/// Reprompts allowed after an unparseable Action reply.
pub const ACTION_REPROMPTS: usize = 2;

/// Candidate lines of a reply with list markers, quotes and code fences
/// peeled off.
fn candidates(reply: &str) -> impl Iterator<Item = &str> {
    reply.lines().filter_map(|line| {
        let mut s = line.trim();
        if s.starts_with("```") {
            return None;
        }
        s = s.trim_start_matches(['>', '-', '*']).trim();
        s = s.trim_matches('`').trim();
        (!s.is_empty()).then_some(s)
    })
}

/// The first line of `reply` that parses as an action.
pub fn extract_action(reply: &str) -> Result<Action, String> {
    let mut first_error = None;
    for line in candidates(reply) {
        match parse_action(line) {
            Ok(a) => return Ok(a),
            Err(e) => {
                first_error.get_or_insert_with(|| format!("{line:?}: {e}"));
            }
        }
    }
    Err(first_error.unwrap_or_else(|| "the reply was empty".into()))
}

/// One line per verb, e.g. `SORT(range, key=COLUMN[, order=ASC|DESC])`.
pub fn verb_signatures() -> String {
    registry()
        .iter()
        .map(|h| format!("- {}", h.signature().render(h.verb())))
        .collect::<Vec<_>>()
        .join("\n")
}

/// The conversation sent for a subtask, before any reprompt.
pub fn action_prompt(t: &Subtask, ctx: &SheetContext, feedback: Option<&str>) -> Vec<sheetmind_llm::ChatMessage> {
    let feedback = match feedback {
        Some(f) => format!("\nYour previous action was rejected: {f}\nProduce a corrected action."),
        None => String::new(),
    };
    let context = ctx.render();
    let signatures = verb_signatures();
    templates::conversation(
        templates::ACTION,
        &[
            ("grammar", GRAMMAR_EBNF),
            ("signatures", &signatures),
            ("context", &context),
            ("subtask", &t.description),
            ("feedback", &feedback),
        ],
    )
}

pub fn action_generate(
    t: &Subtask,
    ctx: &SheetContext,
    feedback: Option<&str>,
    backend: &dyn ChatBackend,
) -> Result<Action, AgentError> {
    let convo = action_prompt(t, ctx, feedback);
    let asked = ask(backend, convo, ACTION_REPROMPTS, extract_action, |e| {
        format!("That reply contained no valid action ({e}). Reply with a single action line in the grammar.")
    })?;
    asked.parsed.map_err(|reason| AgentError::GenerationFailure { reason })
}
