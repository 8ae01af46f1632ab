use sheetmind_llm::BackendError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error(transparent)]
    Backend(#[from] BackendError),

    /// The Manager reply had no usable numbered plan, even after a reprompt.
    #[error("planning failure: {reason}")]
    PlanningFailure { reason: String, raw: String },

    /// No line of the Action reply parsed as an action.
    #[error("generation failure: {reason}")]
    GenerationFailure { reason: String },
}

impl AgentError {
    pub fn code(&self) -> &'static str {
        match self {
            AgentError::Backend(e) => e.code(),
            AgentError::PlanningFailure { .. } => "planning-failure",
            AgentError::GenerationFailure { .. } => "generation-failure",
        }
    }
}
