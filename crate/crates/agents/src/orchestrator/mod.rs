//! Sessions, the pipeline state machine, transcripts and persistence.

mod config;
mod pipeline;
mod store;
mod transcript;

pub use crate::context::extract_context;
pub use config::{
    Ablation, AblationRegistry, ConfigError, DirectPlanner, ManagerPlanner, PipelineConfig, Planner,
    ReflectionReviewer, Reviewer, StaticReviewer, Strategies, MAX_BUDGET,
};
pub use pipeline::{
    run_instruction, ExecutedAction, InstructionOutcome, SessionState, Status, SubtaskReport, SubtaskStatus,
};
pub use store::{SessionStore, StoreError};
pub use transcript::{Event, EventKind, Transcript};
