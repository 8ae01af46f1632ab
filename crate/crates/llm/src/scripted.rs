//! Deterministic replay of canned replies.
//!
//! A script is either a plain YAML list of `{match, reply}` entries consumed
//! strictly in order, or a set of lanes:
//!
//! ```yaml
//! lanes:
//!   - when: "ROLE: manager"
//!     entries:
//!       - match: "Decompose"
//!         reply: "1. Clear column E"
//! ```
//!
//! Each call goes to the first lane whose `when` prefixes the conversation's
//! first message, and that lane's entries are consumed strictly in order.
//! Lanes let one script serve pipelines that skip some agents.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::backend::ChatBackend;
use crate::error::BackendError;
use crate::message::{validate_conversation, ChatMessage};

const HEAD_CHARS: usize = 160;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    #[serde(rename = "match", default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    pub reply: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lane {
    pub when: String,
    pub entries: Vec<ScriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BackendScript {
    Entries(Vec<ScriptEntry>),
    Lanes { lanes: Vec<Lane> },
}

impl BackendScript {
    pub fn from_yaml(text: &str) -> Result<BackendScript, BackendError> {
        serde_yaml::from_str(text).map_err(|e| BackendError::Config(format!("script: {e}")))
    }

    fn into_lanes(self) -> Vec<Lane> {
        match self {
            BackendScript::Entries(entries) => vec![Lane {
                when: String::new(),
                entries,
            }],
            BackendScript::Lanes { lanes } => lanes,
        }
    }
}

/// One served call, kept for assertions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRecord {
    pub lane: String,
    pub prompt_head: String,
    pub reply: String,
}

#[derive(Debug)]
struct State {
    lanes: Vec<Lane>,
    cursors: Vec<usize>,
    log: Vec<CallRecord>,
}

/// Replays a script. Calls are serialized so order is preserved across
/// threads.
#[derive(Debug)]
pub struct ScriptedBackend {
    state: Mutex<State>,
}

fn head(text: &str) -> String {
    text.chars().take(HEAD_CHARS).collect()
}

impl ScriptedBackend {
    pub fn new(script: BackendScript) -> Self {
        let lanes = script.into_lanes();
        ScriptedBackend {
            state: Mutex::new(State {
                cursors: vec![0; lanes.len()],
                lanes,
                log: Vec::new(),
            }),
        }
    }

    pub fn from_replies<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedBackend::new(BackendScript::Entries(
            replies
                .into_iter()
                .map(|r| ScriptEntry {
                    expect: None,
                    reply: r.into(),
                })
                .collect(),
        ))
    }

    pub fn from_yaml(text: &str) -> Result<Self, BackendError> {
        BackendScript::from_yaml(text).map(ScriptedBackend::new)
    }

    pub fn calls(&self) -> Vec<CallRecord> {
        self.state.lock().expect("script lock").log.clone()
    }

    pub fn call_count(&self) -> usize {
        self.state.lock().expect("script lock").log.len()
    }

    /// Entries not yet consumed, summed over lanes.
    pub fn remaining(&self) -> usize {
        let s = self.state.lock().expect("script lock");
        s.lanes.iter().zip(&s.cursors).map(|(l, c)| l.entries.len() - c).sum()
    }
}

impl ChatBackend for ScriptedBackend {
    fn kind(&self) -> &'static str {
        "scripted"
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatMessage, BackendError> {
        validate_conversation(messages)?;
        let first = messages.first().map(|m| m.content.as_str()).unwrap_or("");
        let prompt: String = messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n");
        let last = messages.last().map(|m| m.content.as_str()).unwrap_or("");

        let mut s = self.state.lock().expect("script lock");
        let Some(lane) = s.lanes.iter().position(|l| first.starts_with(&l.when)) else {
            return Err(BackendError::ScriptMismatch {
                expected: "a lane for this prompt".into(),
                actual_head: head(first),
            });
        };
        let cursor = s.cursors[lane];
        let lane_name = s.lanes[lane].when.clone();
        let Some(entry) = s.lanes[lane].entries.get(cursor).cloned() else {
            return Err(BackendError::ScriptExhausted {
                lane: lane_name,
                consumed: cursor,
            });
        };
        if let Some(expected) = &entry.expect {
            if !prompt.contains(expected.as_str()) {
                return Err(BackendError::ScriptMismatch {
                    expected: expected.clone(),
                    actual_head: head(last),
                });
            }
        }
        s.cursors[lane] += 1;
        s.log.push(CallRecord {
            lane: lane_name,
            prompt_head: head(last),
            reply: entry.reply.clone(),
        });
        Ok(ChatMessage::assistant(entry.reply))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_list_in_order() {
        let b = ScriptedBackend::from_yaml("- match: Decompose\n  reply: \"1. step\"\n").unwrap();
        let r = b.complete(&[ChatMessage::user("Decompose this")]).unwrap();
        assert_eq!(r, ChatMessage::assistant("1. step"));
        let err = b.complete(&[ChatMessage::user("Decompose again")]).unwrap_err();
        assert_eq!(err.code(), "script-exhausted");
    }

    #[test]
    fn mismatch_reports_expected_and_head() {
        let b = ScriptedBackend::from_yaml("- match: Decompose\n  reply: x\n").unwrap();
        match b.complete(&[ChatMessage::user("something else")]).unwrap_err() {
            BackendError::ScriptMismatch { expected, actual_head } => {
                assert_eq!(expected, "Decompose");
                assert_eq!(actual_head, "something else");
            }
            other => panic!("{other:?}"),
        }
        // a mismatch does not consume the entry
        assert_eq!(b.remaining(), 1);
    }

    #[test]
    fn lanes_route_by_first_message() {
        let yaml = r#"
lanes:
  - when: "ROLE: manager"
    entries:
      - reply: plan
  - when: "ROLE: action"
    entries:
      - reply: a1
      - reply: a2
"#;
        let b = ScriptedBackend::from_yaml(yaml).unwrap();
        let act = |b: &ScriptedBackend| {
            b.complete(&[ChatMessage::system("ROLE: action\n..."), ChatMessage::user("go")])
                .unwrap()
                .content
        };
        assert_eq!(act(&b), "a1");
        let plan = b
            .complete(&[ChatMessage::system("ROLE: manager\n..."), ChatMessage::user("go")])
            .unwrap();
        assert_eq!(plan.content, "plan");
        assert_eq!(act(&b), "a2");
        assert_eq!(b.calls().len(), 3);
        let err = b
            .complete(&[ChatMessage::system("ROLE: summary"), ChatMessage::user("go")])
            .unwrap_err();
        assert_eq!(err.code(), "script-mismatch");
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let b = ScriptedBackend::from_replies(["a", "b"]);
            (0..3)
                .map(|i| b.complete(&[ChatMessage::user(format!("q{i}"))]).map(|m| m.content))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScriptedBackend::from_yaml("- mach: x\n  reply: y\n").is_err());
    }
}
