mod common;

use std::collections::BTreeSet;

use common::golden;
use proptest::prelude::*;
use sheetmind::bench::{parse_configs, run_bench, BackendMode, BenchError, BenchOptions, BenchReport};
use sheetmind::task::Category;
use sheetmind_agents::orchestrator::Ablation;

fn full_report(parallelism: usize) -> BenchReport {
    let options = BenchOptions {
        parallelism,
        ..BenchOptions::default()
    };
    run_bench(&golden(), &Ablation::all(), &BackendMode::Scripted, options).unwrap()
}

fn ids(r: &BenchReport, label: &str) -> BTreeSet<String> {
    r.config(label).unwrap().passed_ids().into_iter().map(String::from).collect()
}

#[test]
fn ablations_order_as_designed() {
    let r = full_report(1);
    let suite = golden();
    let all: BTreeSet<String> = suite.iter().map(|t| t.id().to_string()).collect();
    let faulted: BTreeSet<String> = suite.iter().filter(|t| t.fault_injected()).map(|t| t.id().to_string()).collect();
    let multi: BTreeSet<String> = suite
        .iter()
        .filter(|t| t.category() == Category::MultiStep)
        .map(|t| t.id().to_string())
        .collect();

    assert_eq!(ids(&r, "full"), all);
    assert_eq!(ids(&r, "no_reflection"), &all - &faulted);
    let no_manager = ids(&r, "no_manager");
    assert!(no_manager.is_disjoint(&multi));
    assert_eq!(no_manager, &all - &multi, "planning faults never reach single-step tasks");
    let action_only = ids(&r, "action_only");
    assert!(action_only.is_subset(&no_manager));
    assert!(action_only.is_subset(&ids(&r, "no_reflection")));

    let passed = |l: &str| r.config(l).unwrap().overall.passed;
    assert!(passed("full") > passed("no_reflection"));
    assert!(passed("no_reflection") >= passed("no_manager"));
    assert!(passed("no_manager") >= passed("action_only"));
    assert_eq!(passed("action_only"), 5);
}

#[test]
fn failures_carry_reasons() {
    let r = full_report(1);
    for c in &r.configs {
        for t in &c.tasks {
            assert_eq!(t.passed, t.failure_reason.is_none(), "{} {}", c.label, t.task);
            assert_eq!(t.passed, t.check.passed());
        }
    }
    let t20 = r.config("no_manager").unwrap().tasks.iter().find(|t| t.task == "t20").unwrap();
    assert!(t20.failure_reason.as_deref().unwrap().contains("differ"), "{t20:?}");
}

#[test]
fn parallel_run_matches_sequential() {
    let (a, b) = (full_report(1), full_report(4));
    assert_eq!(a.configs, b.configs);
    assert_eq!(a.suite, b.suite);
}

#[test]
fn table_and_json_views() {
    let r = full_report(1);
    let table = r.table();
    assert!(table.lines().any(|l| l.starts_with("full") && l.contains("20/20")), "{table}");
    assert!(table.contains("action_only failed: t06"), "{table}");
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["configs"][1]["by_category"]["multi_step"]["passed"], 5);
    let back: BenchReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn scripted_mode_needs_scripts() {
    let mut suite = golden();
    suite[3].script = None;
    let err = run_bench(&suite, &[Ablation::FULL], &BackendMode::Scripted, BenchOptions::default()).unwrap_err();
    assert!(matches!(err, BenchError::MissingScript(id) if id == "t04"));
    let err = run_bench(&suite, &[], &BackendMode::Scripted, BenchOptions::default()).unwrap_err();
    assert!(matches!(err, BenchError::NoConfigs));
}

#[test]
fn config_lists() {
    assert_eq!(parse_configs("full, no_manager").unwrap(), [Ablation::FULL, Ablation::NO_MANAGER]);
    assert!(parse_configs("full,everything").unwrap_err().contains("everything"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn report_arithmetic(mask in proptest::collection::vec(any::<bool>(), 20), cfgs in proptest::sample::subsequence(Ablation::all().to_vec(), 1..=4)) {
        let suite: Vec<_> = golden().into_iter().zip(&mask).filter(|(_, k)| **k).map(|(t, _)| t).collect();
        prop_assume!(!suite.is_empty());
        let r = run_bench(&suite, &cfgs, &BackendMode::Scripted, BenchOptions::default()).unwrap();
        prop_assert_eq!(r.suite.tasks, suite.len());
        prop_assert_eq!(r.suite.by_category.values().sum::<usize>(), suite.len());
        for c in &r.configs {
            let passed = c.tasks.iter().filter(|t| t.passed).count();
            prop_assert_eq!(c.overall.passed, passed);
            prop_assert_eq!(c.overall.total, suite.len());
            prop_assert_eq!(c.overall.rate, passed as f64 / suite.len() as f64);
            prop_assert_eq!(c.by_category.values().map(|t| t.total).sum::<usize>(), suite.len());
            prop_assert_eq!(c.by_category.values().map(|t| t.passed).sum::<usize>(), passed);
            for (cat, tally) in &c.by_category {
                let runs: Vec<_> = c.tasks.iter().filter(|t| t.category == *cat).collect();
                let p = runs.iter().filter(|t| t.passed).count();
                prop_assert_eq!(tally.passed, p);
                let rate = if runs.is_empty() { 0.0 } else { p as f64 / runs.len() as f64 };
                prop_assert_eq!(tally.rate, rate);
            }
            let order: Vec<&str> = c.tasks.iter().map(|t| t.task.as_str()).collect();
            let expected: Vec<&str> = suite.iter().map(|t| t.id()).collect();
            prop_assert_eq!(order, expected);
        }
    }
}
