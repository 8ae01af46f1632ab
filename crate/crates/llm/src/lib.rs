//! Chat-completion backends behind one trait.
//!
//! [`HttpBackend`] talks to a generic JSON chat endpoint; [`ScriptedBackend`]
//! replays canned replies for deterministic runs. Both are built from a
//! [`BackendConfig`] through the [`BackendRegistry`].

mod backend;
mod config;
mod error;
mod http;
mod message;
mod scripted;

pub use backend::{BackendFactory, BackendRegistry, ChatBackend};
pub use config::{BackendConfig, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL};
pub use error::BackendError;
pub use http::HttpBackend;
pub use message::{truncate_conversation, validate_conversation, ChatMessage, Role, CONVERSATION_BUDGET};
pub use scripted::{BackendScript, CallRecord, Lane, ScriptEntry, ScriptedBackend};
