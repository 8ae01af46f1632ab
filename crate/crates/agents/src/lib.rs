//! Manager, Action and Reflection agents over a chat backend, and the
//! orchestrator that runs instructions through them.
//!
//! Agents are stateless prompt builders and reply parsers; all session
//! state lives in [`orchestrator::SessionState`].

mod ask;

pub mod action;
pub mod context;
pub mod error;
pub mod manager;
pub mod orchestrator;
pub mod reflect;
pub mod summary;
pub mod templates;

pub use action::{action_generate, action_prompt, extract_action, verb_signatures};
pub use context::{extract_context, SheetContext};
pub use error::AgentError;
pub use manager::{manager_plan, manager_reformulate, parse_plan, Instruction, Plan, Subtask};
pub use reflect::{describe_result, parse_post_judge, parse_pre_judge, reflect_post, reflect_pre, PostVerdict};
pub use summary::{summarize, template_summary, SummaryItem, NO_CHANGES};
