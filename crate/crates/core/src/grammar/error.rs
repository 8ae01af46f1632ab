use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    UnknownVerb,
    Arity,
    Condition,
    Syntax,
}

/// A structured parse failure with the byte offset it occurred at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(
        kind: ParseErrorKind,
        position: usize,
        message: impl Into<String>,
        expected: Vec<String>,
    ) -> ParseError {
        ParseError {
            kind,
            position,
            message: message.into(),
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.position, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" | "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// A parse failure inside a `;`-separated script.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("action {index}: {error}")]
pub struct ScriptError {
    pub index: usize,
    pub error: ParseError,
}
