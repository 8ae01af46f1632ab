//! Append-only event log of a session.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Instruction,
    Plan,
    ActionProposed,
    VerdictPre,
    Executed,
    VerdictPost,
    Escalation,
    Summary,
    Error,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Instruction => "instruction",
            EventKind::Plan => "plan",
            EventKind::ActionProposed => "action_proposed",
            EventKind::VerdictPre => "verdict_pre",
            EventKind::Executed => "executed",
            EventKind::VerdictPost => "verdict_post",
            EventKind::Escalation => "escalation",
            EventKind::Summary => "summary",
            EventKind::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub ts: String,
    pub kind: EventKind,
    pub subtask: Option<usize>,
    pub payload: Value,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    /// Appends an event. With `sequence_clock` the timestamp is the sequence
    /// number; otherwise it is the current UTC time.
    pub fn push(&mut self, kind: EventKind, subtask: Option<usize>, payload: Value, sequence_clock: bool) -> &Event {
        let seq = self.events.len() as u64 + 1;
        let ts = if sequence_clock {
            seq.to_string()
        } else {
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
        };
        self.events.push(Event {
            seq,
            ts,
            kind,
            subtask,
            payload,
        });
        self.events.last().expect("just pushed")
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events with `seq` greater than `seq`.
    pub fn since(&self, seq: u64) -> &[Event] {
        let start = (seq as usize).min(self.events.len());
        &self.events[start..]
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses JSONL, requiring sequence numbers 1, 2, 3, ...
    pub fn from_jsonl(text: &str) -> Result<Transcript, String> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: Event = serde_json::from_str(line).map_err(|err| format!("line {}: {err}", i + 1))?;
            if e.seq != events.len() as u64 + 1 {
                return Err(format!("line {}: expected seq {}, found {}", i + 1, events.len() + 1, e.seq));
            }
            events.push(e);
        }
        Ok(Transcript { events })
    }

    /// The same events with every timestamp replaced by its sequence number.
    pub fn normalized(&self) -> Transcript {
        Transcript {
            events: self
                .events
                .iter()
                .map(|e| Event {
                    ts: e.seq.to_string(),
                    ..e.clone()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn jsonl_round_trip_and_shape() {
        let mut t = Transcript::new();
        t.push(EventKind::Instruction, None, json!({"text": "hi"}), true);
        t.push(EventKind::ActionProposed, Some(1), json!({"action": "SELECT(A1)"}), false);
        let text = t.to_jsonl();
        let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(
            first,
            json!({"seq": 1, "ts": "1", "kind": "instruction", "subtask": null, "payload": {"text": "hi"}})
        );
        assert_eq!(Transcript::from_jsonl(&text).unwrap(), t);
        assert!(t.events()[1].ts.ends_with('Z'));
        assert_eq!(t.since(1).len(), 1);
        assert_eq!(t.since(99).len(), 0);
        assert!(Transcript::from_jsonl(text.lines().nth(1).unwrap()).is_err());
    }
}
