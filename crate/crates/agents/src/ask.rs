use sheetmind_llm::{BackendError, ChatBackend, ChatMessage};

/// Outcome of a conversation that may be reprompted after unparseable replies.
pub(crate) struct Asked<T> {
    pub parsed: Result<T, String>,
    /// The last raw reply.
    pub raw: String,
}

/// Sends `convo`, parses the reply, and on a parse error appends the reply
/// plus a corrective user turn, up to `reprompts` times.
pub(crate) fn ask<T>(
    backend: &dyn ChatBackend,
    mut convo: Vec<ChatMessage>,
    reprompts: usize,
    parse: impl Fn(&str) -> Result<T, String>,
    correction: impl Fn(&str) -> String,
) -> Result<Asked<T>, BackendError> {
    let mut attempt = 0;
    loop {
        let reply = backend.complete(&convo)?;
        match parse(&reply.content) {
            Ok(v) => {
                return Ok(Asked {
                    parsed: Ok(v),
                    raw: reply.content,
                })
            }
            Err(e) if attempt == reprompts => {
                return Ok(Asked {
                    parsed: Err(e),
                    raw: reply.content,
                })
            }
            Err(e) => {
                tracing::debug!(attempt, error = %e, "reprompting after unparseable reply");
                convo.push(ChatMessage::assistant(if reply.content.trim().is_empty() {
                    "(empty reply)".to_string()
                } else {
                    reply.content
                }));
                convo.push(ChatMessage::user(correction(&e)));
                attempt += 1;
            }
        }
    }
}
