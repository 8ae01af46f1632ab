mod common;

use common::*;
use sheetmind_agents::orchestrator::{
    Ablation, EventKind, PipelineConfig, SessionState, Status, SubtaskStatus, Transcript,
};
use sheetmind_core::{apply_diff, CellValue, SheetDiff, Workbook};

fn session(wb: Workbook, ablation: Ablation) -> SessionState {
    SessionState::new(
        "test",
        wb,
        PipelineConfig {
            test_mode: true,
            ..PipelineConfig::with_ablation(ablation)
        },
    )
}

fn kinds(t: &Transcript) -> Vec<&'static str> {
    t.events().iter().map(|e| e.kind.as_str()).collect()
}

const WORKED_LANES: &str = r#"
lanes:
  - when: "ROLE: manager"
    entries:
      - match: "Decompose"
        reply: "1. Clear every cell in column E whose text starts with a digit"
  - when: "ROLE: action"
    entries:
      - reply: 'DELETE(E:E) WHERE MATCHES("^[0-9]")'
  - when: "ROLE: pre-check"
    entries:
      - reply: "VALID"
  - when: "ROLE: post-check"
    entries:
      - reply: "OK"
"#;

#[test]
fn worked_example_end_to_end() {
    let mut s = session(times_workbook(), Ablation::FULL);
    let b = lanes(WORKED_LANES);
    let out = s.run_instruction(&b, WORKED_INSTRUCTION);
    assert_eq!(out.status, Status::Success, "{out:?}");
    assert_eq!(out.executed_actions.len(), 1);
    assert_eq!(out.executed_actions[0].action, WORKED_ACTION);
    assert_eq!(out.summary, "Cleared 2 cells in E.");
    assert_eq!(
        kinds(&s.transcript),
        ["instruction", "plan", "action_proposed", "verdict_pre", "executed", "verdict_post", "summary"]
    );
    let sheet = s.workbook.active_sheet();
    assert!(sheet.get(cell("E1")).is_empty());
    assert_eq!(sheet.get(cell("E2")), &CellValue::Text("late".into()));
    assert!(sheet.get(cell("E3")).is_empty());
    assert_eq!(b.inner.remaining(), 0);
    assert_eq!(b.roles(), ["ROLE: manager", "ROLE: action", "ROLE: pre-check", "ROLE: post-check"]);
}

#[test]
fn one_regeneration_after_invalid() {
    let mut s = session(times_workbook(), Ablation::FULL);
    let b = scripted(&[
        "1. Clear every cell in column E whose text starts with a digit",
        r#"DELETE(D:D) WHERE MATCHES("^[0-9]")"#,
        "INVALID: wrong column, use E",
        WORKED_ACTION,
        "VALID",
        "OK",
    ]);
    let out = s.run_instruction(&b, WORKED_INSTRUCTION);
    assert_eq!(out.status, Status::Success);
    assert_eq!(out.executed_actions.len(), 1);
    assert_eq!(s.transcript.of_kind(EventKind::ActionProposed).count(), 2);
    let pre: Vec<_> = s.transcript.of_kind(EventKind::VerdictPre).collect();
    assert_eq!(pre[0].payload["verdict"], "invalid");
    assert_eq!(pre[1].payload["verdict"], "valid");
    let second_action_prompt = &b.conversations()[3];
    assert!(second_action_prompt[1].content.contains("wrong column, use E"));
}

/// Backend calls for a one-subtask plan whose every action the pre-check
/// rejects: the plan, then per round (1 + retries) x (action + judge), with
/// one reformulation prompt opening each extra round.
fn expected_calls(retries: u32, reformulations: u32) -> usize {
    let per_round = (1 + retries as usize) * 2;
    1 + per_round + reformulations as usize * (1 + per_round)
}

fn always_invalid_script(retries: u32, reformulations: u32) -> Vec<String> {
    let mut replies = vec!["1. Clear every cell in column E whose text starts with a digit".to_string()];
    for round in 0..=reformulations {
        if round > 0 {
            replies.push("1. Clear the cells in E that begin with a digit".into());
        }
        for _ in 0..=retries {
            replies.push(WORKED_ACTION.into());
            replies.push("INVALID: not convinced".into());
        }
    }
    replies
}

#[test]
fn budget_exhaustion_escalates_then_fails() {
    let mut s = session(times_workbook(), Ablation::FULL);
    let script = always_invalid_script(3, 1);
    let b = scripted(&script.iter().map(String::as_str).collect::<Vec<_>>());
    let out = s.run_instruction(&b, WORKED_INSTRUCTION);
    assert_eq!(out.status, Status::Failure);
    assert!(out.executed_actions.is_empty());
    assert_eq!(b.count(), 18);
    assert_eq!(b.count(), expected_calls(3, 1));
    assert_eq!(s.transcript.of_kind(EventKind::VerdictPre).count(), 8);
    assert_eq!(s.transcript.of_kind(EventKind::Escalation).count(), 2);
    let k = kinds(&s.transcript);
    assert_eq!(&k[k.len() - 2..], ["escalation", "summary"]);
    let last = s.transcript.events().last().unwrap();
    assert_eq!(last.payload["status"], "failure");
    let plans: Vec<_> = s.transcript.of_kind(EventKind::Plan).collect();
    assert_eq!(plans.len(), 2);
    assert_eq!(plans[1].payload["reformulation"], true);
    assert!(b.conversations()[9][1].content.contains("Reformulate the remaining work"));
}

#[test]
fn budget_formula_holds_across_settings() {
    for retries in 0..=4 {
        for reformulations in 0..=2 {
            let mut s = session(times_workbook(), Ablation::FULL);
            s.config.max_action_retries = retries;
            s.config.max_reformulations = reformulations;
            let script = always_invalid_script(retries, reformulations);
            let b = scripted(&script.iter().map(String::as_str).collect::<Vec<_>>());
            let out = s.run_instruction(&b, WORKED_INSTRUCTION);
            assert_eq!(out.status, Status::Failure);
            assert_eq!(b.count(), expected_calls(retries, reformulations), "R={retries} F={reformulations}");
            assert_eq!(b.inner.remaining(), 0);
            let bound = 1 + (1 + reformulations as usize) * (1 + (1 + retries as usize) * 3);
            assert!(b.count() <= bound);
        }
    }
}

#[test]
fn reformulation_replaces_remaining_work() {
    let mut s = session(pairs_workbook(), Ablation::FULL);
    let b = scripted(&[
        "1. Sort the table by column A\n2. Put the sum of column B in C1 [after 1]",
        "SORT(A1:B3, key=A)",
        "VALID",
        "OK",
        "AGGREGATE(B1:B3, C1, fn=SUM)",
        "VALID",
        "ESCALATE: C1 should hold a count, not a sum",
        "1. Put the number of values in column B in C1",
        "AGGREGATE(B1:B3, C1, fn=COUNT)",
        "VALID",
        "OK",
    ]);
    let out = s.run_instruction(&b, "Sort rows by column A, then put the sum of column B in C1");
    assert_eq!(out.status, Status::Success, "{out:?}");
    assert_eq!(out.subtasks.len(), 2);
    assert_eq!(out.subtasks[1].description, "Put the number of values in column B in C1");
    assert_eq!(out.executed_actions.len(), 3, "no rollback of the escalated subtask");
    assert_eq!(s.workbook.active_sheet().get(cell("C1")), &CellValue::Number(3.0));
    let plans: Vec<_> = s.transcript.of_kind(EventKind::Plan).collect();
    assert_eq!(plans[1].payload["subtasks"][0]["index"], 2);
}

#[test]
fn failed_dependency_skips_dependents_only() {
    let mut s = session(pairs_workbook(), Ablation::FULL);
    s.config.max_action_retries = 0;
    s.config.max_reformulations = 0;
    let b = scripted(&[
        "1. Sort the table by column A\n2. Sum B into C1 [after 1]\n3. Write done in D1",
        "SORT(A1:B3, key=A)",
        "INVALID: no",
        "SET(D1, \"done\")",
        "VALID",
        "OK",
    ]);
    let out = s.run_instruction(&b, "three things");
    assert_eq!(out.status, Status::Partial);
    let st: Vec<_> = out.subtasks.iter().map(|t| t.status).collect();
    assert_eq!(st, [SubtaskStatus::Failed, SubtaskStatus::Skipped, SubtaskStatus::Done]);
    assert!(out.failure_reason.unwrap().starts_with("subtask 1 failed"));
}

#[test]
fn backend_unavailable_aborts_turn() {
    let mut s = session(times_workbook(), Ablation::FULL);
    let out = s.run_instruction(&Down, WORKED_INSTRUCTION);
    assert_eq!(out.status, Status::Failure);
    let err = s.transcript.of_kind(EventKind::Error).next().unwrap();
    assert_eq!(err.payload["code"], "backend-unavailable");
    assert_eq!(s.workbook, times_workbook());
}

#[test]
fn exhausted_script_mid_turn_is_failure_without_rollback() {
    let mut s = session(pairs_workbook(), Ablation::FULL);
    let b = scripted(&["1. Sort by A\n2. Sum B into C1", "SORT(A1:B3, key=A)", "VALID", "OK"]);
    let out = s.run_instruction(&b, "two things");
    assert_eq!(out.status, Status::Failure);
    assert_eq!(out.executed_actions.len(), 1);
    assert_eq!(s.workbook.active_sheet().get(cell("A1")), &CellValue::Text("a".into()));
    let err = s.transcript.of_kind(EventKind::Error).next().unwrap();
    assert_eq!(err.payload["code"], "script-exhausted");
}

#[test]
fn ablations_never_prompt_disabled_agents() {
    let script = r#"
lanes:
  - when: "ROLE: manager"
    entries: [{reply: "1. Clear every cell in column E whose text starts with a digit"}]
  - when: "ROLE: action"
    entries: [{reply: 'DELETE(E:E) WHERE MATCHES("^[0-9]")'}]
  - when: "ROLE: pre-check"
    entries: [{reply: VALID}]
  - when: "ROLE: post-check"
    entries: [{reply: OK}]
"#;
    for ablation in Ablation::all() {
        let mut s = session(times_workbook(), ablation);
        let b = lanes(script);
        let out = s.run_instruction(&b, WORKED_INSTRUCTION);
        assert_eq!(out.status, Status::Success, "{ablation}");
        let roles = b.roles();
        assert_eq!(roles.iter().any(|r| r == "ROLE: manager"), ablation.manager, "{ablation}");
        let judged = roles.iter().any(|r| r.ends_with("-check"));
        assert_eq!(judged, ablation.reflection, "{ablation}");
        let jsonl = s.transcript.to_jsonl();
        if !ablation.reflection {
            assert!(!jsonl.contains("ROLE: pre-check"));
        }
    }
}

#[test]
fn no_reflection_keeps_static_gate() {
    let mut s = session(times_workbook(), Ablation::NO_REFLECTION);
    let b = scripted(&["1. Clear E", "DELETE(Missing!E:E)", WORKED_ACTION]);
    let out = s.run_instruction(&b, WORKED_INSTRUCTION);
    assert_eq!(out.status, Status::Success);
    let pre: Vec<_> = s.transcript.of_kind(EventKind::VerdictPre).collect();
    assert_eq!(pre[0].payload["code"], "bounds");
    assert_eq!(b.count(), 3);
}

#[test]
fn generation_failure_counts_as_invalid() {
    let mut s = session(times_workbook(), Ablation::FULL);
    let b = scripted(&["1. Clear E", "nope", "nope", "nope", WORKED_ACTION, "VALID", "OK"]);
    let out = s.run_instruction(&b, WORKED_INSTRUCTION);
    assert_eq!(out.status, Status::Success);
    let pre: Vec<_> = s.transcript.of_kind(EventKind::VerdictPre).collect();
    assert_eq!(pre[0].payload["code"], "parse");
    assert_eq!(pre[0].payload["attempt"], 1);
    assert_eq!(pre[1].payload["attempt"], 2);
}

#[test]
fn empty_diff_retries_within_budget() {
    let mut wb = Workbook::new();
    wb.set_cell("Sheet1", cell("A1"), CellValue::Number(1.0)).unwrap();
    let mut s = session(wb, Ablation::FULL);
    let b = scripted(&["1. Put 2 in A1", "SET(A1, 1)", "VALID", "SET(A1, 2)", "VALID", "OK"]);
    let out = s.run_instruction(&b, "Put 2 in A1");
    assert_eq!(out.status, Status::Success);
    let post: Vec<_> = s.transcript.of_kind(EventKind::VerdictPost).collect();
    assert_eq!(post[0].payload["verdict"], "retry");
    assert_eq!(post[0].payload["text"], "no change detected");
    assert_eq!(out.summary, "Set 1 cell in A.");
}

fn run_twice(test_mode: bool) -> (Transcript, Transcript) {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let mut s = session(times_workbook(), Ablation::FULL);
        s.config.test_mode = test_mode;
        let b = lanes(WORKED_LANES);
        s.run_instruction(&b, WORKED_INSTRUCTION);
        runs.push(s.transcript);
    }
    let second = runs.pop().unwrap();
    (runs.pop().unwrap(), second)
}

#[test]
fn replay_is_deterministic() {
    let (a, b) = run_twice(true);
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    let (a, b) = run_twice(false);
    assert_eq!(a.normalized().to_jsonl(), b.normalized().to_jsonl());
}

#[test]
fn executed_diffs_rebuild_final_workbook() {
    let initial = pairs_workbook();
    let mut s = session(initial.clone(), Ablation::FULL);
    let b = scripted(&[
        "1. Sort by A\n2. Sum B into C1 [after 1]\n3. Delete the row whose A is b",
        "SORT(A1:B3, key=A)",
        "VALID",
        "OK",
        "AGGREGATE(B1:B3, C1, fn=SUM)",
        "VALID",
        "OK",
        "DELETE_ROWS(A1:A3) WHERE VALUE = \"b\"",
        "VALID",
        "OK",
    ]);
    let out = s.run_instruction(&b, "three steps");
    assert_eq!(out.status, Status::Success, "{out:?}");
    let mut wb = initial;
    for e in s.transcript.of_kind(EventKind::Executed) {
        let d: SheetDiff = serde_json::from_value(e.payload["diff"].clone()).unwrap();
        wb = apply_diff(&wb, &d).unwrap();
    }
    assert_eq!(wb, s.workbook);
}

#[test]
fn turns_are_contiguous_and_versions_grow() {
    let mut s = session(times_workbook(), Ablation::FULL);
    let b = lanes(WORKED_LANES);
    s.run_instruction(&b, WORKED_INSTRUCTION);
    let v1 = s.workbook.version();
    let b = scripted(&["1. Put x in A1", "SET(A1, \"x\")", "VALID", "OK"]);
    let out = s.run_instruction(&b, "Put x in A1");
    assert_eq!(out.turn, 2);
    assert!(s.workbook.version() > v1);
    let instr: Vec<_> = s.transcript.of_kind(EventKind::Instruction).map(|e| e.seq).collect();
    let summaries: Vec<_> = s.transcript.of_kind(EventKind::Summary).map(|e| e.seq).collect();
    assert_eq!(instr.len(), 2);
    assert!(summaries[0] < instr[1]);
    assert_eq!(summaries[1] as usize, s.transcript.len());
}

#[test]
fn empty_instruction_is_rejected() {
    let mut s = session(Workbook::new(), Ablation::FULL);
    let out = s.run_instruction(&scripted(&[]), "   ");
    assert_eq!(out.status, Status::Failure);
    assert_eq!(kinds(&s.transcript), ["instruction", "error", "summary"]);
}
