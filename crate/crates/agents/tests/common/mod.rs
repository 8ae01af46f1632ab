#![allow(dead_code)]

use std::sync::Mutex;

use sheetmind_core::{CellAddress, CellValue, Workbook};
use sheetmind_llm::{BackendError, ChatBackend, ChatMessage, ScriptedBackend};

/// Wraps a backend and records every conversation it receives.
pub struct Recorder<B> {
    pub inner: B,
    pub seen: Mutex<Vec<Vec<ChatMessage>>>,
}

impl<B: ChatBackend> Recorder<B> {
    pub fn new(inner: B) -> Self {
        Recorder {
            inner,
            seen: Mutex::new(Vec::new()),
        }
    }

    /// The `ROLE:` line of each call, in order.
    pub fn roles(&self) -> Vec<String> {
        self.seen
            .lock()
            .unwrap()
            .iter()
            .map(|c| c[0].content.lines().next().unwrap_or_default().to_string())
            .collect()
    }

    pub fn conversations(&self) -> Vec<Vec<ChatMessage>> {
        self.seen.lock().unwrap().clone()
    }

    pub fn count(&self) -> usize {
        self.seen.lock().unwrap().len()
    }
}

impl<B: ChatBackend> ChatBackend for Recorder<B> {
    fn kind(&self) -> &'static str {
        "recorder"
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatMessage, BackendError> {
        self.seen.lock().unwrap().push(messages.to_vec());
        self.inner.complete(messages)
    }
}

pub fn scripted(replies: &[&str]) -> Recorder<ScriptedBackend> {
    Recorder::new(ScriptedBackend::from_replies(replies.iter().copied()))
}

pub fn lanes(yaml: &str) -> Recorder<ScriptedBackend> {
    Recorder::new(ScriptedBackend::from_yaml(yaml).unwrap())
}

/// Always fails as an unreachable endpoint would.
pub struct Down;

impl ChatBackend for Down {
    fn kind(&self) -> &'static str {
        "down"
    }

    fn complete(&self, _: &[ChatMessage]) -> Result<ChatMessage, BackendError> {
        Err(BackendError::Unavailable {
            attempts: 4,
            detail: "connection refused".into(),
        })
    }
}

pub fn cell(a1: &str) -> CellAddress {
    CellAddress::parse(a1).unwrap()
}

/// Column E holding "9am", "late", "3pm".
pub fn times_workbook() -> Workbook {
    let mut wb = Workbook::new();
    for (a1, v) in [("E1", "9am"), ("E2", "late"), ("E3", "3pm")] {
        wb.set_cell("Sheet1", cell(a1), CellValue::infer(v)).unwrap();
    }
    wb
}

/// A1:B3 with letters in A and numbers in B.
pub fn pairs_workbook() -> Workbook {
    let mut wb = Workbook::new();
    for (i, (a, b)) in [("c", 3.0), ("a", 1.0), ("b", 2.0)].into_iter().enumerate() {
        let r = i as u32 + 1;
        wb.set_cell("Sheet1", CellAddress::new(1, r), CellValue::Text(a.into())).unwrap();
        wb.set_cell("Sheet1", CellAddress::new(2, r), CellValue::Number(b)).unwrap();
    }
    wb
}

pub const WORKED_INSTRUCTION: &str = "Delete any element from the fifth column that starts with a number";
pub const WORKED_SUBTASK: &str = "Clear every cell in column E whose text starts with a digit";
pub const WORKED_ACTION: &str = r#"DELETE(E:E) WHERE MATCHES("^[0-9]")"#;
