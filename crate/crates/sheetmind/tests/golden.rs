mod common;

use std::collections::BTreeSet;

use common::golden;
use sheetmind::task::{check_task, Category, CheckResult};
use sheetmind_core::{diff, execute, parse_action};
use sheetmind_testkit::naive_apply;

#[test]
fn suite_shape() {
    let suite = golden();
    assert_eq!(suite.len(), 20);
    let single = suite.iter().filter(|t| t.category() == Category::SingleStep).count();
    assert_eq!(single, 10);
    let faulted: Vec<&str> = suite.iter().filter(|t| t.fault_injected()).map(|t| t.id()).collect();
    assert_eq!(faulted, ["t06", "t07", "t08", "t09", "t10", "t16", "t17", "t18", "t19", "t20"]);
    for t in &suite {
        assert!(t.script.is_some(), "{}", t.id());
        assert!(!t.spec.reference.is_empty(), "{}", t.id());
        let multi = t.category() == Category::MultiStep;
        assert_eq!(multi, t.spec.reference.len() > 1, "{}", t.id());
    }
    let families: BTreeSet<_> = suite.iter().filter_map(|t| t.spec.family.as_deref()).collect();
    assert!(families.len() >= 6, "{families:?}");
}

/// The reference actions, run by the independent dense-grid interpreter,
/// land exactly on each task's expected workbook, and so does the real one.
#[test]
fn references_reach_expected_state() {
    for t in golden() {
        let mut naive = t.initial.clone();
        let mut ours = t.initial.clone();
        for text in &t.spec.reference {
            let a = parse_action(text).unwrap_or_else(|e| panic!("{}: {text}: {e}", t.id()));
            naive = naive_apply(&naive, &a).unwrap_or_else(|e| panic!("{}: {text}: {e}", t.id())).0;
            execute(&mut ours, &a).unwrap_or_else(|e| panic!("{}: {text}: {e}", t.id()));
        }
        assert_eq!(check_task(&t.expected, &naive), CheckResult::Pass, "{} (oracle)", t.id());
        assert_eq!(check_task(&t.expected, &ours), CheckResult::Pass, "{}", t.id());
    }
}

#[test]
fn expected_differs_from_initial_unless_read_only() {
    for t in golden() {
        let read_only = t.spec.reference.iter().all(|r| r.starts_with("SELECT"));
        assert_eq!(diff(&t.initial, &t.expected).is_empty(), read_only, "{}", t.id());
    }
}

#[test]
fn worked_example_clears_two_cells() {
    let t = common::golden_task("t01");
    let d = diff(&t.initial, &t.expected);
    let cells: Vec<String> = d.cell_changes.iter().map(|c| c.addr.to_string()).collect();
    assert_eq!(cells, ["E1", "E3"]);
}
