use serde::{Deserialize, Serialize};

use crate::error::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// Budget for the non-system part of a conversation, in bytes.
pub const CONVERSATION_BUDGET: usize = 32 * 1024;

/// Checks shape: an optional leading system message, then user/assistant
/// turns alternating from user and ending on user, none of them empty.
pub fn validate_conversation(messages: &[ChatMessage]) -> Result<(), BackendError> {
    let bad = |why: String| Err(BackendError::InvalidConversation(why));
    let turns = match messages.first() {
        Some(m) if m.role == Role::System => &messages[1..],
        _ => messages,
    };
    if turns.is_empty() {
        return bad("no user message".into());
    }
    for (i, m) in turns.iter().enumerate() {
        let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
        if m.role != expected {
            return bad(format!("turn {} is {}, expected {}", i + 1, m.role.as_str(), expected.as_str()));
        }
        if m.content.is_empty() {
            return bad(format!("turn {} is empty", i + 1));
        }
    }
    if turns.len() % 2 == 0 {
        return bad("conversation must end with a user message".into());
    }
    Ok(())
}

/// Keeps the system message and the most recent turns within
/// [`CONVERSATION_BUDGET`]. Whole user/assistant pairs are dropped oldest
/// first; a final user message that alone exceeds the budget keeps its tail.
pub fn truncate_conversation(messages: &[ChatMessage]) -> Vec<ChatMessage> {
    let (system, turns) = match messages.first() {
        Some(m) if m.role == Role::System => (Some(m.clone()), &messages[1..]),
        _ => (None, messages),
    };
    let size = |ms: &[ChatMessage]| ms.iter().map(|m| m.content.len()).sum::<usize>();
    let mut start = 0;
    while size(&turns[start..]) > CONVERSATION_BUDGET && turns.len() - start > 1 {
        start += 2;
    }
    let mut kept: Vec<ChatMessage> = turns[start..].to_vec();
    if let [only] = kept.as_mut_slice() {
        if only.content.len() > CONVERSATION_BUDGET {
            let mut cut = only.content.len() - CONVERSATION_BUDGET;
            while !only.content.is_char_boundary(cut) {
                cut += 1;
            }
            only.content = only.content[cut..].to_string();
        }
    }
    system.into_iter().chain(kept).collect()
}
