//! The per-instruction state machine.
//!
//! Plan, then for each subtask: generate, pre-check, execute, post-check.
//! Rejections loop back to generation with feedback until the retry budget
//! runs out; then the subtask escalates to a reformulation of the remaining
//! work, or fails. Executed effects are never rolled back.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sheetmind_core::{execute, serialize_action, InvalidCode, SheetDiff, Verdict, Workbook};
use sheetmind_llm::ChatBackend;

use super::config::{AblationRegistry, PipelineConfig, Strategies};
use super::transcript::{EventKind, Transcript};
use crate::action::action_generate;
use crate::context::extract_context;
use crate::error::AgentError;
use crate::manager::{Instruction, Plan, Subtask};
use crate::reflect::PostVerdict;
use crate::summary::{summarize, SummaryItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    Partial,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtaskStatus {
    Pending,
    Done,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtaskReport {
    pub index: usize,
    pub description: String,
    pub status: SubtaskStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutedAction {
    pub subtask: usize,
    pub action: String,
    pub diff: SheetDiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionOutcome {
    pub turn: u64,
    pub status: Status,
    pub executed_actions: Vec<ExecutedAction>,
    pub subtasks: Vec<SubtaskReport>,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
}

/// Live state of one editing session.
#[derive(Debug, Clone)]
pub struct SessionState {
    pub id: String,
    pub workbook: Workbook,
    pub transcript: Transcript,
    pub config: PipelineConfig,
    pub turn: u64,
}

enum SubtaskEnd {
    Done,
    Escalated(String),
    Aborted(AgentError),
}

/// Mutable bookkeeping for one turn.
struct Turn<'a> {
    session: &'a mut SessionState,
    backend: &'a dyn ChatBackend,
    strategies: Strategies,
    executed: Vec<ExecutedAction>,
    items: Vec<SummaryItem>,
}

impl Turn<'_> {
    fn emit(&mut self, kind: EventKind, subtask: Option<usize>, payload: Value) {
        let clock = self.session.config.test_mode;
        let e = self.session.transcript.push(kind, subtask, payload, clock);
        tracing::debug!(seq = e.seq, kind = kind.as_str(), subtask, "transcript event");
    }

    fn instruction(&self, text: &str) -> Instruction {
        Instruction {
            text: text.to_string(),
            context: extract_context(&self.session.workbook),
        }
    }

    fn emit_plan(&mut self, plan: &Plan, reformulation: bool, offset: usize) {
        let subtasks: Vec<Value> = plan
            .subtasks
            .iter()
            .map(|t| json!({"index": t.index + offset, "description": t.description, "depends_on": t.depends_on.iter().map(|d| d + offset).collect::<Vec<_>>()}))
            .collect();
        self.emit(
            EventKind::Plan,
            None,
            json!({
                "planner": self.strategies.planner.name(),
                "reformulation": reformulation,
                "subtasks": subtasks,
                "raw": plan.raw,
            }),
        );
    }

    fn run_subtask(&mut self, t: &Subtask) -> SubtaskEnd {
        let max = self.session.config.max_action_retries;
        let mut retries = 0u32;
        let mut feedback: Option<String> = None;
        let idx = Some(t.index);
        loop {
            if retries > max {
                let last = feedback.unwrap_or_default();
                return SubtaskEnd::Escalated(format!("retry budget of {max} exhausted; last feedback: {last}"));
            }
            let attempt = retries + 1;
            let ctx = extract_context(&self.session.workbook);
            let action = match action_generate(t, &ctx, feedback.as_deref(), self.backend) {
                Ok(a) => a,
                Err(AgentError::GenerationFailure { reason }) => {
                    let v = Verdict::invalid(InvalidCode::Parse, reason.clone());
                    self.emit(EventKind::VerdictPre, idx, verdict_payload(&v, attempt));
                    feedback = Some(format!("no parsable action: {reason}"));
                    retries += 1;
                    continue;
                }
                Err(e) => return SubtaskEnd::Aborted(e),
            };
            let text = serialize_action(&action);
            self.emit(EventKind::ActionProposed, idx, json!({"action": text, "attempt": attempt}));

            let verdict = match self.strategies.reviewer.pre(t, &action, &self.session.workbook, self.backend) {
                Ok(v) => v,
                Err(e) => return SubtaskEnd::Aborted(e.into()),
            };
            self.emit(EventKind::VerdictPre, idx, verdict_payload(&verdict, attempt));
            if let Verdict::Invalid { reason, .. } = verdict {
                feedback = Some(reason);
                retries += 1;
                continue;
            }

            let result = match execute(&mut self.session.workbook, &action) {
                Ok(r) => r,
                Err(e) => {
                    self.emit(
                        EventKind::Error,
                        idx,
                        json!({"code": "execution-failed", "message": e.to_string(), "action": text}),
                    );
                    feedback = Some(e.to_string());
                    retries += 1;
                    continue;
                }
            };
            let selected = result.selection.as_ref().map(Vec::len);
            self.emit(
                EventKind::Executed,
                idx,
                json!({
                    "action": text,
                    "diff": result.diff,
                    "mutated": result.mutated,
                    "selected": selected,
                    "version": self.session.workbook.version(),
                }),
            );
            self.executed.push(ExecutedAction {
                subtask: t.index,
                action: text.clone(),
                diff: result.diff.clone(),
            });
            self.items.push(SummaryItem {
                action: Some(text),
                diff: result.diff.clone(),
                selected,
            });

            let post = match self.strategies.reviewer.post(t, &action, &result, self.backend) {
                Ok(p) => p,
                Err(e) => return SubtaskEnd::Aborted(e.into()),
            };
            let mut payload = serde_json::to_value(&post).expect("verdict serializes");
            payload["attempt"] = json!(attempt);
            self.emit(EventKind::VerdictPost, idx, payload);
            match post {
                PostVerdict::Ok => return SubtaskEnd::Done,
                PostVerdict::Retry(fb) => {
                    feedback = Some(fb);
                    retries += 1;
                }
                PostVerdict::Escalate(reason) => return SubtaskEnd::Escalated(reason),
            }
        }
    }

    fn finish(mut self, statuses: Vec<SubtaskReport>, abort: Option<String>) -> InstructionOutcome {
        let done = statuses.iter().filter(|s| s.status == SubtaskStatus::Done).count();
        let status = if abort.is_some() || done == 0 {
            Status::Failure
        } else if done == statuses.len() {
            Status::Success
        } else {
            Status::Partial
        };
        let failure_reason = abort.or_else(|| {
            statuses
                .iter()
                .find(|s| s.status != SubtaskStatus::Done)
                .map(|s| match &s.reason {
                    Some(r) => format!("subtask {} {}: {r}", s.index, status_word(s.status)),
                    None => format!("subtask {} {}", s.index, status_word(s.status)),
                })
        });
        let polish = self.session.config.polish_summary.then_some(self.backend);
        let summary = summarize(&self.items, polish);
        self.emit(
            EventKind::Summary,
            None,
            json!({"text": summary, "status": status, "subtasks": statuses, "failure_reason": failure_reason}),
        );
        InstructionOutcome {
            turn: self.session.turn,
            status,
            executed_actions: self.executed,
            subtasks: statuses,
            summary,
            failure_reason,
        }
    }
}

fn status_word(s: SubtaskStatus) -> &'static str {
    match s {
        SubtaskStatus::Pending => "did not run",
        SubtaskStatus::Done => "done",
        SubtaskStatus::Failed => "failed",
        SubtaskStatus::Skipped => "skipped",
    }
}

fn verdict_payload(v: &Verdict, attempt: u32) -> Value {
    let mut p = serde_json::to_value(v).expect("verdict serializes");
    p["attempt"] = json!(attempt);
    p
}

fn report(t: &Subtask) -> SubtaskReport {
    SubtaskReport {
        index: t.index,
        description: t.description.clone(),
        status: SubtaskStatus::Pending,
        reason: None,
    }
}

impl SessionState {
    pub fn new(id: impl Into<String>, workbook: Workbook, config: PipelineConfig) -> SessionState {
        SessionState {
            id: id.into(),
            workbook,
            transcript: Transcript::new(),
            config,
            turn: 0,
        }
    }

    /// Runs one user instruction to completion.
    pub fn run_instruction(&mut self, backend: &dyn ChatBackend, text: &str) -> InstructionOutcome {
        self.run_with(&AblationRegistry::standard(), backend, text)
    }

    /// As [`SessionState::run_instruction`], taking strategies from `registry`.
    pub fn run_with(&mut self, registry: &AblationRegistry, backend: &dyn ChatBackend, text: &str) -> InstructionOutcome {
        self.turn += 1;
        let label = self.config.ablation.label();
        let strategies = registry
            .build(label)
            .unwrap_or_else(|| panic!("ablation {label:?} is not registered"));
        let mut turn = Turn {
            session: self,
            backend,
            strategies,
            executed: Vec::new(),
            items: Vec::new(),
        };
        let turn_no = turn.session.turn;
        turn.emit(
            EventKind::Instruction,
            None,
            json!({"text": text, "turn": turn_no, "ablation": label}),
        );
        if text.trim().is_empty() {
            let msg = "instruction is empty".to_string();
            turn.emit(EventKind::Error, None, json!({"code": "empty-instruction", "message": msg}));
            return turn.finish(Vec::new(), Some(msg));
        }

        let instr = turn.instruction(text);
        let plan = match turn.strategies.planner.plan(&instr, backend) {
            Ok(p) => p,
            Err(e) => return abort(turn, e, Vec::new(), None),
        };
        turn.emit_plan(&plan, false, 0);

        let mut subtasks = plan.subtasks;
        let mut statuses: Vec<SubtaskReport> = subtasks.iter().map(report).collect();
        let mut reformulations_left = turn.session.config.max_reformulations;
        let mut i = 0;
        while i < subtasks.len() {
            let t = subtasks[i].clone();
            let blocked = t
                .depends_on
                .iter()
                .find(|&&d| matches!(statuses[d - 1].status, SubtaskStatus::Failed | SubtaskStatus::Skipped));
            if let Some(&d) = blocked {
                statuses[i].status = SubtaskStatus::Skipped;
                statuses[i].reason = Some(format!("depends on subtask {d}, which did not complete"));
                i += 1;
                continue;
            }
            match turn.run_subtask(&t) {
                SubtaskEnd::Done => statuses[i].status = SubtaskStatus::Done,
                SubtaskEnd::Aborted(e) => return abort(turn, e, statuses, Some(t.index)),
                SubtaskEnd::Escalated(reason) => {
                    let can_reformulate = reformulations_left > 0;
                    turn.emit(
                        EventKind::Escalation,
                        Some(t.index),
                        json!({"reason": reason, "reformulation": can_reformulate && turn.session.config.ablation.manager}),
                    );
                    let attempt = if can_reformulate {
                        let instr = turn.instruction(text);
                        turn.strategies
                            .planner
                            .reformulate(&instr, &t, &reason, &subtasks[i + 1..], backend)
                    } else {
                        None
                    };
                    match attempt {
                        Some(Ok(plan)) => {
                            reformulations_left -= 1;
                            turn.emit_plan(&plan, true, i);
                            subtasks.truncate(i);
                            statuses.truncate(i);
                            for mut s in plan.subtasks {
                                s.index += i;
                                s.depends_on.iter_mut().for_each(|d| *d += i);
                                statuses.push(report(&s));
                                subtasks.push(s);
                            }
                            continue;
                        }
                        Some(Err(AgentError::PlanningFailure { reason: why, .. })) => {
                            turn.emit(
                                EventKind::Error,
                                Some(t.index),
                                json!({"code": "planning-failure", "message": why}),
                            );
                            statuses[i].status = SubtaskStatus::Failed;
                            statuses[i].reason = Some(format!("{reason}; reformulation failed: {why}"));
                        }
                        Some(Err(e)) => return abort(turn, e, statuses, Some(t.index)),
                        None => {
                            statuses[i].status = SubtaskStatus::Failed;
                            statuses[i].reason = Some(reason);
                        }
                    }
                }
            }
            i += 1;
        }
        turn.finish(statuses, None)
    }
}

fn abort(mut turn: Turn<'_>, e: AgentError, mut statuses: Vec<SubtaskReport>, at: Option<usize>) -> InstructionOutcome {
    tracing::warn!(code = e.code(), error = %e, "instruction aborted");
    turn.emit(EventKind::Error, at, json!({"code": e.code(), "message": e.to_string()}));
    for s in statuses.iter_mut().filter(|s| s.status == SubtaskStatus::Pending) {
        s.status = SubtaskStatus::Failed;
        s.reason = Some(e.code().to_string());
    }
    turn.finish(statuses, Some(e.to_string()))
}

/// Free-function form of [`SessionState::run_instruction`].
pub fn run_instruction(s: &mut SessionState, backend: &dyn ChatBackend, text: &str) -> InstructionOutcome {
    s.run_instruction(backend, text)
}
