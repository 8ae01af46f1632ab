//! Minimal chat-completion client.
//!
//! `POST {base_url}/chat` with `{"model", "messages", "temperature"}`,
//! expecting `{"content": "..."}` back. Transport failures and 408/429/5xx
//! are retried with exponential backoff.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread::sleep;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use crate::backend::ChatBackend;
use crate::config::BackendConfig;
use crate::error::BackendError;
use crate::message::{truncate_conversation, validate_conversation, ChatMessage};

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    content: String,
}

pub struct HttpBackend {
    client: Client,
    endpoint: String,
    model: String,
    api_key: Option<String>,
    temperature: f64,
    max_retries: u32,
    backoff_base: Duration,
    retries: AtomicU64,
}

impl fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

fn retryable(status: StatusCode) -> bool {
    status == StatusCode::REQUEST_TIMEOUT || status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}

impl HttpBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let base = config.base_url.as_deref().unwrap_or_default().trim_end_matches('/');
        let client = Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(HttpBackend {
            client,
            endpoint: format!("{base}/chat"),
            model: config.model.clone().unwrap_or_default(),
            api_key: std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty()),
            temperature: config.temperature,
            max_retries: config.max_retries,
            backoff_base: Duration::from_millis(config.backoff_base_ms),
            retries: AtomicU64::new(0),
        })
    }

    /// Retries performed over the backend's lifetime.
    pub fn retries(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }

    fn attempt(&self, body: &ChatRequest<'_>) -> Result<Result<String, String>, BackendError> {
        let mut req = self.client.post(&self.endpoint).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Ok(Err(format!("transport: {e}"))),
        };
        let status = resp.status();
        if retryable(status) {
            return Ok(Err(format!("status {}", status.as_u16())));
        }
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(BackendError::Rejected {
                status: status.as_u16(),
                body: body.chars().take(500).collect(),
            });
        }
        let parsed: ChatResponse = resp.json().map_err(|e| BackendError::Protocol(e.to_string()))?;
        Ok(Ok(parsed.content))
    }
}

impl ChatBackend for HttpBackend {
    fn kind(&self) -> &'static str {
        "http"
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatMessage, BackendError> {
        validate_conversation(messages)?;
        let messages = truncate_conversation(messages);
        let body = ChatRequest {
            model: &self.model,
            messages: &messages,
            temperature: self.temperature,
        };
        let mut delay = self.backoff_base;
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                self.retries.fetch_add(1, Ordering::Relaxed);
                tracing::debug!(attempt, delay_ms = delay.as_millis() as u64, "retrying chat request");
                sleep(delay);
                delay *= 2;
            }
            match self.attempt(&body)? {
                Ok(content) => return Ok(ChatMessage::assistant(content)),
                Err(why) => {
                    tracing::warn!(endpoint = %self.endpoint, %why, "chat request failed");
                    last = why;
                }
            }
        }
        Err(BackendError::Unavailable {
            attempts: self.max_retries + 1,
            detail: last,
        })
    }
}
