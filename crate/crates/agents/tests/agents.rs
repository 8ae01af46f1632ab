mod common;

use common::*;
use sheetmind_agents::{
    action_generate, extract_context, manager_plan, reflect_post, reflect_pre, summarize, template_summary,
    AgentError, Instruction, PostVerdict, Subtask, SummaryItem,
};
use sheetmind_core::{
    execute, parse_action, serialize_action, CellValue, InvalidCode, Verdict, Workbook, GRAMMAR_EBNF,
};
use sheetmind_llm::ChatBackend;

fn instruction(text: &str, wb: &Workbook) -> Instruction {
    Instruction {
        text: text.into(),
        context: extract_context(wb),
    }
}

fn subtask(text: &str) -> Subtask {
    Subtask {
        index: 1,
        description: text.into(),
        depends_on: vec![],
    }
}

#[test]
fn manager_single_subtask_for_worked_example() {
    let wb = times_workbook();
    let b = scripted(&["1. Clear every cell in column E whose text starts with a digit"]);
    let plan = manager_plan(&instruction(WORKED_INSTRUCTION, &wb), &b).unwrap();
    assert_eq!(plan.subtasks.len(), 1);
    assert_eq!(plan.subtasks[0].description, WORKED_SUBTASK);
    assert_eq!(b.roles(), ["ROLE: manager"]);
    let prompt = &b.conversations()[0][1].content;
    assert!(prompt.contains(WORKED_INSTRUCTION));
    assert!(prompt.contains("E1 [s] 9am"));
}

#[test]
fn manager_dependency_tags() {
    let b = scripted(&["1. Sort rows by column A\n2. Put the sum of column B in C1 [after 1]"]);
    let plan = manager_plan(
        &instruction("Sort rows by column A, then put the sum of column B in C1", &pairs_workbook()),
        &b,
    )
    .unwrap();
    assert_eq!(plan.subtasks.len(), 2);
    assert_eq!(plan.subtasks[1].depends_on, vec![1]);
    assert!(plan.subtasks[0].depends_on.is_empty());
}

#[test]
fn manager_gives_up_after_one_reprompt() {
    let b = scripted(&["no idea", "no idea", "1. never reached"]);
    let err = manager_plan(&instruction("do it", &Workbook::new()), &b).unwrap_err();
    assert_eq!(err.code(), "planning-failure");
    assert_eq!(b.count(), 2);
    let second = b.conversations()[1].clone();
    assert_eq!(second.len(), 4);
    assert!(second[3].content.contains("no numbered subtasks"));
}

#[test]
fn action_parses_worked_example() {
    let ctx = extract_context(&times_workbook());
    let b = scripted(&[WORKED_ACTION]);
    let a = action_generate(&subtask(WORKED_SUBTASK), &ctx, None, &b).unwrap();
    assert_eq!(a, parse_action(WORKED_ACTION).unwrap());
    assert_eq!(serialize_action(&a), WORKED_ACTION);
}

#[test]
fn action_extracts_fenced_line_after_prose() {
    let ctx = extract_context(&times_workbook());
    let reply = format!("I will clear the matching cells.\n```\n{WORKED_ACTION}\n```\nDone.");
    let b = scripted(&[&reply]);
    let a = action_generate(&subtask(WORKED_SUBTASK), &ctx, None, &b).unwrap();
    assert_eq!(serialize_action(&a), WORKED_ACTION);
}

#[test]
fn action_fails_after_two_reprompts() {
    let ctx = extract_context(&Workbook::new());
    let b = scripted(&["garbage", "garbage", "garbage", "SELECT(A1)"]);
    let err = action_generate(&subtask("anything"), &ctx, None, &b).unwrap_err();
    assert!(matches!(err, AgentError::GenerationFailure { .. }));
    assert_eq!(b.count(), 3);
    let last = b.conversations()[2].clone();
    assert!(last.last().unwrap().content.contains("garbage"), "parse error threaded into reprompt");
}

#[test]
fn action_prompt_has_grammar_and_verbatim_feedback() {
    let ctx = extract_context(&times_workbook());
    let feedback = "INVALID: wrong column, the times are in E not D";
    let b = scripted(&[WORKED_ACTION]);
    action_generate(&subtask(WORKED_SUBTASK), &ctx, Some(feedback), &b).unwrap();
    let convo = &b.conversations()[0];
    assert!(convo[0].content.contains(GRAMMAR_EBNF));
    assert!(convo[1].content.contains(feedback));
}

#[test]
fn pre_check_static_gate_makes_no_call() {
    let b = scripted(&[]);
    let a = parse_action("SELECT(Missing!A1)").unwrap();
    let v = reflect_pre(&subtask("read"), &a, &Workbook::new(), &b).unwrap();
    assert!(matches!(v, Verdict::Invalid { code: InvalidCode::Bounds, .. }), "{v:?}");
    assert_eq!(b.count(), 0);
}

#[test]
fn pre_check_judge_verdicts() {
    let wb = times_workbook();
    let a = parse_action(WORKED_ACTION).unwrap();
    let t = subtask(WORKED_SUBTASK);

    let b = scripted(&["VALID"]);
    assert_eq!(reflect_pre(&t, &a, &wb, &b).unwrap(), Verdict::Valid);
    assert_eq!(b.roles(), ["ROLE: pre-check"]);
    assert!(b.conversations()[0][1].content.contains(WORKED_ACTION));

    let b = scripted(&["INVALID: wrong column"]);
    assert_eq!(
        reflect_pre(&t, &a, &wb, &b).unwrap(),
        Verdict::invalid(InvalidCode::Semantic, "wrong column")
    );

    let b = scripted(&["hmm", "maybe?"]);
    let v = reflect_pre(&t, &a, &wb, &b).unwrap();
    assert_eq!(v, Verdict::invalid(InvalidCode::Semantic, "judge-unparseable"));
    assert_eq!(b.count(), 2);
}

#[test]
fn post_check_empty_diff_rule() {
    let mut wb = Workbook::new();
    wb.set_cell("Sheet1", cell("A1"), CellValue::Number(1.0)).unwrap();
    let set = parse_action("SET(A1, 1)").unwrap();
    let result = execute(&mut wb, &set).unwrap();
    assert!(result.diff.is_empty());
    let b = scripted(&[]);
    let v = reflect_post(&subtask("set A1 to 1"), &set, &result, &b).unwrap();
    assert_eq!(v, PostVerdict::Retry("no change detected".into()));
    assert_eq!(b.count(), 0);

    let select = parse_action("SELECT(A1)").unwrap();
    let result = execute(&mut wb, &select).unwrap();
    let b = scripted(&["OK"]);
    assert_eq!(reflect_post(&subtask("read A1"), &select, &result, &b).unwrap(), PostVerdict::Ok);
    assert_eq!(b.count(), 1, "SELECT is exempt from the empty-diff rule");
}

#[test]
fn post_check_judge_verdicts() {
    let a = parse_action(WORKED_ACTION).unwrap();
    let t = subtask(WORKED_SUBTASK);
    let run = |replies: &[&str]| {
        let mut wb = times_workbook();
        let result = execute(&mut wb, &a).unwrap();
        let b = scripted(replies);
        let v = reflect_post(&t, &a, &result, &b).unwrap();
        (v, b)
    };
    let (v, b) = run(&["OK"]);
    assert_eq!(v, PostVerdict::Ok);
    assert_eq!(b.roles(), ["ROLE: post-check"]);
    assert!(b.conversations()[0][1].content.contains("Sheet1!E1: \"9am\" -> (empty)"));

    let (v, _) = run(&["ESCALATE: subtask impossible as stated"]);
    assert_eq!(v, PostVerdict::Escalate("subtask impossible as stated".into()));

    let (v, b) = run(&["sure", "yes"]);
    assert_eq!(v, PostVerdict::Retry("judge-unparseable".into()));
    assert_eq!(b.count(), 2);
}

/// Cleared cells per column, counted straight from the two workbooks.
fn cleared_by_column(before: &Workbook, after: &Workbook) -> Vec<(String, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for (addr, v) in before.active_sheet().cells() {
        if !v.is_empty() && after.active_sheet().get(addr).is_empty() {
            *counts.entry(sheetmind_core::column_letters(addr.col)).or_insert(0) += 1;
        }
    }
    counts.into_iter().collect()
}

#[test]
fn summary_counts_match_direct_count() {
    let before = times_workbook();
    let mut after = before.clone();
    let a = parse_action(WORKED_ACTION).unwrap();
    let result = execute(&mut after, &a).unwrap();
    let expected = cleared_by_column(&before, &after);
    assert_eq!(expected, vec![("E".to_string(), 2)]);

    let text = template_summary(&[SummaryItem {
        action: Some(WORKED_ACTION.into()),
        diff: result.diff.clone(),
        selected: None,
    }]);
    assert_eq!(text, "Cleared 2 cells in E.");
    let untyped = template_summary(&[SummaryItem::from_diff(result.diff)]);
    assert!(untyped.contains('2') && untyped.contains('E'), "{untyped}");
}

#[test]
fn summary_joins_clauses() {
    let mut wb = times_workbook();
    let r = execute(&mut wb, &parse_action(WORKED_ACTION).unwrap()).unwrap();
    let mut items = vec![SummaryItem {
        action: Some(WORKED_ACTION.into()),
        diff: r.diff,
        selected: None,
    }];
    let mut pairs = pairs_workbook();
    let sort = "SORT(A1:B3, key=A, order=ASC)";
    let r = execute(&mut pairs, &parse_action(sort).unwrap()).unwrap();
    items.push(SummaryItem {
        action: Some(sort.into()),
        diff: r.diff,
        selected: None,
    });
    assert_eq!(template_summary(&items), "Cleared 2 cells in E; sorted A1:B3 by A ascending.");
    assert_eq!(summarize(&[], None), "No changes were made.");
}

#[test]
fn summary_polish_guard() {
    let mut wb = times_workbook();
    let r = execute(&mut wb, &parse_action(WORKED_ACTION).unwrap()).unwrap();
    let items = [SummaryItem {
        action: Some(WORKED_ACTION.into()),
        diff: r.diff,
        selected: None,
    }];
    let dropped = scripted(&["Some cells in E were cleared."]);
    assert_eq!(summarize(&items, Some(&dropped)), "Cleared 2 cells in E.");
    assert_eq!(dropped.roles(), ["ROLE: summary"]);

    let kept = scripted(&["Removed the 2 time-like entries from column E."]);
    assert_eq!(
        summarize(&items, Some(&kept)),
        "Removed the 2 time-like entries from column E."
    );

    let down: &dyn ChatBackend = &Down;
    assert_eq!(summarize(&items, Some(down)), "Cleared 2 cells in E.");
}
