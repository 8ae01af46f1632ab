//! Runs a task suite under each ablation and tallies final-state matches.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sheetmind_agents::orchestrator::{Ablation, PipelineConfig, SessionState, Status};
use sheetmind_llm::{BackendError, ChatBackend, ScriptedBackend};
use thiserror::Error;

use crate::task::{check_task, Category, CheckResult, Task};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("task {0} has no backend script; scripted runs need one")]
    MissingScript(String),

    #[error("task {task}: {source}")]
    Script {
        task: String,
        #[source]
        source: BackendError,
    },

    #[error("no ablation configs requested")]
    NoConfigs,

    #[error("thread pool: {0}")]
    Pool(String),
}

/// Where replies come from.
#[derive(Clone)]
pub enum BackendMode {
    /// Each task's own script, replayed fresh for every run.
    Scripted,
    /// One live backend shared by all runs.
    Live(Arc<dyn ChatBackend>),
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    /// Tasks run concurrently per config; 1 runs them in order.
    pub parallelism: usize,
    /// Sequence-number timestamps in transcripts.
    pub test_mode: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            parallelism: 1,
            test_mode: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRun {
    pub task: String,
    pub category: Category,
    pub fault_injected: bool,
    pub passed: bool,
    pub status: Status,
    pub executed_actions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    pub check: CheckResult,
    /// SHA-256 of the transcript with timestamps normalized.
    pub transcript_sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: usize,
    pub total: usize,
    pub rate: f64,
}

impl Tally {
    fn of<'a>(runs: impl Iterator<Item = &'a TaskRun>) -> Tally {
        let (mut passed, mut total) = (0, 0);
        for r in runs {
            total += 1;
            passed += r.passed as usize;
        }
        Tally {
            passed,
            total,
            rate: if total == 0 { 0.0 } else { passed as f64 / total as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub label: String,
    pub overall: Tally,
    pub by_category: BTreeMap<Category, Tally>,
    pub tasks: Vec<TaskRun>,
}

impl ConfigReport {
    pub fn passed_ids(&self) -> Vec<&str> {
        self.tasks.iter().filter(|t| t.passed).map(|t| t.task.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteMeta {
    pub tasks: usize,
    pub by_category: BTreeMap<Category, usize>,
    pub fault_injected: usize,
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub suite: SuiteMeta,
    pub configs: Vec<ConfigReport>,
    pub wall_clock_ms: u64,
}

impl BenchReport {
    pub fn config(&self, label: &str) -> Option<&ConfigReport> {
        self.configs.iter().find(|c| c.label == label)
    }

    /// Fixed-width table, one row per config.
    pub fn table(&self) -> String {
        let mut out = format!("{:<14} {:>14} {:>14} {:>14}\n", "config", "single_step", "multi_step", "overall");
        let cell = |t: &Tally| format!("{}/{} {:>5.1}%", t.passed, t.total, t.rate * 100.0);
        for c in &self.configs {
            let single = c.by_category.get(&Category::SingleStep).map(cell).unwrap_or_default();
            let multi = c.by_category.get(&Category::MultiStep).map(cell).unwrap_or_default();
            let _ = writeln!(out, "{:<14} {:>14} {:>14} {:>14}", c.label, single, multi, cell(&c.overall));
        }
        for c in &self.configs {
            let failed: Vec<&str> = c.tasks.iter().filter(|t| !t.passed).map(|t| t.task.as_str()).collect();
            if !failed.is_empty() {
                let _ = writeln!(out, "{} failed: {}", c.label, failed.join(", "));
            }
        }
        let _ = write!(out, "{} task(s), {} ms", self.suite.tasks, self.wall_clock_ms);
        out
    }
}

/// Runs one task under one ablation in a fresh session.
pub fn run_task(
    task: &Task,
    ablation: Ablation,
    mode: &BackendMode,
    test_mode: bool,
) -> Result<(TaskRun, SessionState), BenchError> {
    let scripted;
    let backend: &dyn ChatBackend = match mode {
        BackendMode::Scripted => {
            let text = task
                .script
                .as_deref()
                .ok_or_else(|| BenchError::MissingScript(task.id().to_string()))?;
            scripted = ScriptedBackend::from_yaml(text).map_err(|source| BenchError::Script {
                task: task.id().to_string(),
                source,
            })?;
            &scripted
        }
        BackendMode::Live(b) => b.as_ref(),
    };
    let config = PipelineConfig {
        test_mode,
        ..PipelineConfig::with_ablation(ablation)
    };
    let mut session = SessionState::new(format!("{}-{}", task.id(), ablation.label()), task.initial.clone(), config);
    let outcome = session.run_instruction(backend, &task.spec.description);
    let check = check_task(&task.expected, &session.workbook);
    let passed = check.passed();
    let failure_reason = match &check {
        CheckResult::Pass => None,
        CheckResult::Fail { detail, .. } => Some(match &outcome.failure_reason {
            Some(r) => format!("{r}; {detail}"),
            None => detail.clone(),
        }),
    };
    let digest = Sha256::digest(session.transcript.normalized().to_jsonl().as_bytes());
    let run = TaskRun {
        task: task.id().to_string(),
        category: task.category(),
        fault_injected: task.fault_injected(),
        passed,
        status: outcome.status,
        executed_actions: outcome.executed_actions.len(),
        failure_reason,
        check,
        transcript_sha256: hex::encode(digest),
    };
    tracing::info!(task = task.id(), config = ablation.label(), passed, "task finished");
    Ok((run, session))
}

pub fn run_bench(
    suite: &[Task],
    configs: &[Ablation],
    mode: &BackendMode,
    options: BenchOptions,
) -> Result<BenchReport, BenchError> {
    if configs.is_empty() {
        return Err(BenchError::NoConfigs);
    }
    if matches!(mode, BackendMode::Scripted) {
        if let Some(t) = suite.iter().find(|t| t.script.is_none()) {
            return Err(BenchError::MissingScript(t.id().to_string()));
        }
    }
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let mut reports = Vec::with_capacity(configs.len());
    for &ablation in configs {
        let run_one = |t: &Task| run_task(t, ablation, mode, options.test_mode).map(|(r, _)| r);
        let runs: Vec<TaskRun> = if options.parallelism > 1 {
            pool.install(|| suite.par_iter().map(run_one).collect::<Result<_, _>>())?
        } else {
            suite.iter().map(run_one).collect::<Result<_, _>>()?
        };
        let by_category = Category::ALL
            .into_iter()
            .map(|c| (c, Tally::of(runs.iter().filter(|r| r.category == c))))
            .collect();
        reports.push(ConfigReport {
            label: ablation.label().to_string(),
            overall: Tally::of(runs.iter()),
            by_category,
            tasks: runs,
        });
    }
    let mut by_category = BTreeMap::new();
    for t in suite {
        *by_category.entry(t.category()).or_insert(0) += 1;
    }
    Ok(BenchReport {
        suite: SuiteMeta {
            tasks: suite.len(),
            by_category,
            fault_injected: suite.iter().filter(|t| t.fault_injected()).count(),
            mode: match mode {
                BackendMode::Scripted => "scripted".into(),
                BackendMode::Live(b) => format!("live:{}", b.kind()),
            },
        },
        configs: reports,
        wall_clock_ms: started.elapsed().as_millis() as u64,
    })
}

/// Parses a comma-separated list of ablation labels.
pub fn parse_configs(list: &str) -> Result<Vec<Ablation>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            Ablation::from_label(s)
                .ok_or_else(|| format!("unknown config {s:?}; expected one of {}", Ablation::LABELS.join(", ")))
        })
        .collect()
}
