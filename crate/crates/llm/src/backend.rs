use std::collections::BTreeMap;
use std::sync::Arc;

use crate::config::BackendConfig;
use crate::error::BackendError;
use crate::http::HttpBackend;
use crate::message::ChatMessage;
use crate::scripted::ScriptedBackend;

/// A chat-completion provider. Implementations are shareable across
/// sessions and threads.
pub trait ChatBackend: Send + Sync {
    /// Registry key of this implementation.
    fn kind(&self) -> &'static str;

    /// Returns the assistant's reply to a well-formed conversation.
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatMessage, BackendError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Arc<T> {
    fn kind(&self) -> &'static str {
        (**self).kind()
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatMessage, BackendError> {
        (**self).complete(messages)
    }
}

pub type BackendFactory = fn(&BackendConfig) -> Result<Arc<dyn ChatBackend>, BackendError>;

/// Backend constructors keyed by kind.
pub struct BackendRegistry {
    factories: BTreeMap<&'static str, BackendFactory>,
}

fn build_http(config: &BackendConfig) -> Result<Arc<dyn ChatBackend>, BackendError> {
    Ok(Arc::new(HttpBackend::new(config)?))
}

fn build_scripted(config: &BackendConfig) -> Result<Arc<dyn ChatBackend>, BackendError> {
    let path = config
        .script
        .as_ref()
        .ok_or_else(|| BackendError::Config("scripted backend needs a script path".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| BackendError::Config(format!("reading {}: {e}", path.display())))?;
    Ok(Arc::new(ScriptedBackend::from_yaml(&text)?))
}

impl BackendRegistry {
    pub fn empty() -> Self {
        BackendRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = BackendRegistry::empty();
        r.register("http", build_http);
        r.register("scripted", build_scripted);
        r
    }

    pub fn register(&mut self, kind: &'static str, factory: BackendFactory) {
        self.factories.insert(kind, factory);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn build(&self, config: &BackendConfig) -> Result<Arc<dyn ChatBackend>, BackendError> {
        config.validate()?;
        let factory = self
            .factories
            .get(config.kind.as_str())
            .ok_or_else(|| BackendError::Config(format!("unknown backend kind {:?}", config.kind)))?;
        factory(config)
    }
}
