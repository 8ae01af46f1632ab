//! Pipeline budgets and the ablation matrix.
//!
//! An ablation label selects a planning strategy and a review strategy from
//! [`AblationRegistry`]; the Action agent is always on.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sheetmind_core::{validate_static, Action, ExecutionResult, Verdict, Workbook};
use sheetmind_llm::{BackendError, ChatBackend};
use thiserror::Error;

use crate::error::AgentError;
use crate::manager::{manager_plan, manager_reformulate, Instruction, Plan, Subtask};
use crate::reflect::{reflect_post, reflect_pre, PostVerdict};

/// Upper bound on either budget, to keep a single turn's cost bounded.
pub const MAX_BUDGET: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid pipeline config: {0}")]
pub struct ConfigError(pub String);

/// Which optional agents run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ablation {
    pub manager: bool,
    pub reflection: bool,
}

impl Ablation {
    pub const FULL: Ablation = Ablation {
        manager: true,
        reflection: true,
    };
    pub const NO_REFLECTION: Ablation = Ablation {
        manager: true,
        reflection: false,
    };
    pub const NO_MANAGER: Ablation = Ablation {
        manager: false,
        reflection: true,
    };
    pub const ACTION_ONLY: Ablation = Ablation {
        manager: false,
        reflection: false,
    };

    /// Labels in the order benchmark reports list them.
    pub const LABELS: [&'static str; 4] = ["full", "no_reflection", "no_manager", "action_only"];

    pub fn label(self) -> &'static str {
        match (self.manager, self.reflection) {
            (true, true) => "full",
            (true, false) => "no_reflection",
            (false, true) => "no_manager",
            (false, false) => "action_only",
        }
    }

    pub fn from_label(label: &str) -> Option<Ablation> {
        match label {
            "full" => Some(Ablation::FULL),
            "no_reflection" => Some(Ablation::NO_REFLECTION),
            "no_manager" => Some(Ablation::NO_MANAGER),
            "action_only" => Some(Ablation::ACTION_ONLY),
            _ => None,
        }
    }

    pub fn all() -> [Ablation; 4] {
        [Ablation::FULL, Ablation::NO_REFLECTION, Ablation::NO_MANAGER, Ablation::ACTION_ONLY]
    }
}

impl Default for Ablation {
    fn default() -> Self {
        Ablation::FULL
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl TryFrom<String> for Ablation {
    type Error = ConfigError;

    fn try_from(s: String) -> Result<Self, ConfigError> {
        Ablation::from_label(&s).ok_or_else(|| {
            ConfigError(format!("unknown ablation {s:?}; expected one of {}", Ablation::LABELS.join(", ")))
        })
    }
}

impl From<Ablation> for String {
    fn from(a: Ablation) -> String {
        a.label().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub max_action_retries: u32,
    pub max_reformulations: u32,
    pub ablation: Ablation,
    /// Let the backend rephrase the final summary.
    pub polish_summary: bool,
    /// Replace timestamps with sequence numbers for byte-stable transcripts.
    pub test_mode: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_action_retries: 3,
            max_reformulations: 1,
            ablation: Ablation::FULL,
            polish_summary: false,
            test_mode: false,
        }
    }
}

impl PipelineConfig {
    pub fn with_ablation(ablation: Ablation) -> Self {
        PipelineConfig {
            ablation,
            ..PipelineConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_action_retries > MAX_BUDGET || self.max_reformulations > MAX_BUDGET {
            return Err(ConfigError(format!("budgets must be at most {MAX_BUDGET}")));
        }
        Ok(())
    }
}

/// Produces the subtask list for an instruction.
pub trait Planner: Send + Sync {
    fn name(&self) -> &'static str;

    fn plan(&self, instr: &Instruction, backend: &dyn ChatBackend) -> Result<Plan, AgentError>;

    /// A new plan for the failed subtask and the work after it, or `None`
    /// when this planner cannot reformulate.
    fn reformulate(
        &self,
        instr: &Instruction,
        failed: &Subtask,
        reason: &str,
        remaining: &[Subtask],
        backend: &dyn ChatBackend,
    ) -> Option<Result<Plan, AgentError>>;
}

/// Checks an action before and after it runs.
pub trait Reviewer: Send + Sync {
    fn name(&self) -> &'static str;

    fn pre(&self, t: &Subtask, a: &Action, wb: &Workbook, backend: &dyn ChatBackend) -> Result<Verdict, BackendError>;

    fn post(
        &self,
        t: &Subtask,
        a: &Action,
        result: &ExecutionResult,
        backend: &dyn ChatBackend,
    ) -> Result<PostVerdict, BackendError>;
}

/// Plans through the Manager agent.
pub struct ManagerPlanner;

impl Planner for ManagerPlanner {
    fn name(&self) -> &'static str {
        "manager"
    }

    fn plan(&self, instr: &Instruction, backend: &dyn ChatBackend) -> Result<Plan, AgentError> {
        manager_plan(instr, backend)
    }

    fn reformulate(
        &self,
        instr: &Instruction,
        failed: &Subtask,
        reason: &str,
        remaining: &[Subtask],
        backend: &dyn ChatBackend,
    ) -> Option<Result<Plan, AgentError>> {
        Some(manager_reformulate(instr, failed, reason, remaining, backend))
    }
}

/// Treats the whole instruction as a single subtask.
pub struct DirectPlanner;

impl Planner for DirectPlanner {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn plan(&self, instr: &Instruction, _backend: &dyn ChatBackend) -> Result<Plan, AgentError> {
        Ok(Plan {
            subtasks: vec![Subtask {
                index: 1,
                description: instr.text.trim().to_string(),
                depends_on: Vec::new(),
            }],
            raw: String::new(),
        })
    }

    fn reformulate(
        &self,
        _instr: &Instruction,
        _failed: &Subtask,
        _reason: &str,
        _remaining: &[Subtask],
        _backend: &dyn ChatBackend,
    ) -> Option<Result<Plan, AgentError>> {
        None
    }
}

/// Static validation plus both judge prompts.
pub struct ReflectionReviewer;

impl Reviewer for ReflectionReviewer {
    fn name(&self) -> &'static str {
        "reflection"
    }

    fn pre(&self, t: &Subtask, a: &Action, wb: &Workbook, backend: &dyn ChatBackend) -> Result<Verdict, BackendError> {
        reflect_pre(t, a, wb, backend)
    }

    fn post(
        &self,
        t: &Subtask,
        a: &Action,
        result: &ExecutionResult,
        backend: &dyn ChatBackend,
    ) -> Result<PostVerdict, BackendError> {
        reflect_post(t, a, result, backend)
    }
}

/// Static validation only; every execution is accepted.
pub struct StaticReviewer;

impl Reviewer for StaticReviewer {
    fn name(&self) -> &'static str {
        "static"
    }

    fn pre(&self, _t: &Subtask, a: &Action, wb: &Workbook, _backend: &dyn ChatBackend) -> Result<Verdict, BackendError> {
        Ok(validate_static(a, wb))
    }

    fn post(
        &self,
        _t: &Subtask,
        _a: &Action,
        _result: &ExecutionResult,
        _backend: &dyn ChatBackend,
    ) -> Result<PostVerdict, BackendError> {
        Ok(PostVerdict::Ok)
    }
}

pub struct Strategies {
    pub planner: Box<dyn Planner>,
    pub reviewer: Box<dyn Reviewer>,
}

type StrategyFactory = fn() -> Strategies;

/// Strategy pairs keyed by ablation label.
pub struct AblationRegistry {
    entries: BTreeMap<&'static str, StrategyFactory>,
}

impl AblationRegistry {
    pub fn empty() -> Self {
        AblationRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = AblationRegistry::empty();
        r.register("full", || Strategies {
            planner: Box::new(ManagerPlanner),
            reviewer: Box::new(ReflectionReviewer),
        });
        r.register("no_reflection", || Strategies {
            planner: Box::new(ManagerPlanner),
            reviewer: Box::new(StaticReviewer),
        });
        r.register("no_manager", || Strategies {
            planner: Box::new(DirectPlanner),
            reviewer: Box::new(ReflectionReviewer),
        });
        r.register("action_only", || Strategies {
            planner: Box::new(DirectPlanner),
            reviewer: Box::new(StaticReviewer),
        });
        r
    }

    pub fn register(&mut self, label: &'static str, factory: StrategyFactory) {
        self.entries.insert(label, factory);
    }

    pub fn labels(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn build(&self, label: &str) -> Option<Strategies> {
        self.entries.get(label).map(|f| f())
    }
}
