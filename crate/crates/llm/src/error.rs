use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend unavailable after {attempts} attempt(s): {detail}")]
    Unavailable { attempts: u32, detail: String },

    #[error("backend rejected the request with status {status}: {body}")]
    Rejected { status: u16, body: String },

    #[error("malformed backend response: {0}")]
    Protocol(String),

    #[error("invalid conversation: {0}")]
    InvalidConversation(String),

    #[error("script exhausted after {consumed} repl{} in lane {lane:?}", if *.consumed == 1 { "y" } else { "ies" })]
    ScriptExhausted { lane: String, consumed: usize },

    #[error("script expected a prompt containing {expected:?}, got {actual_head:?}")]
    ScriptMismatch { expected: String, actual_head: String },

    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    /// Short stable name used in transcripts and reports.
    pub fn code(&self) -> &'static str {
        match self {
            BackendError::Unavailable { .. } => "backend-unavailable",
            BackendError::Rejected { .. } => "backend-rejected",
            BackendError::Protocol(_) => "backend-protocol",
            BackendError::InvalidConversation(_) => "invalid-conversation",
            BackendError::ScriptExhausted { .. } => "script-exhausted",
            BackendError::ScriptMismatch { .. } => "script-mismatch",
            BackendError::Config(_) => "backend-config",
        }
    }
}
