use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::BackendError;

pub const ENV_BASE_URL: &str = "SHEETMIND_LLM_BASE_URL";
pub const ENV_MODEL: &str = "SHEETMIND_LLM_MODEL";
pub const ENV_API_KEY: &str = "SHEETMIND_LLM_API_KEY";

/// How to reach a backend. `kind` is a registry key: `http` or `scripted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: String,
    pub base_url: Option<String>,
    pub model: Option<String>,
    /// Name of the environment variable holding the API key. The key itself
    /// is never stored here.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub temperature: f64,
    pub backoff_base_ms: u64,
    pub script: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: "http".into(),
            base_url: None,
            model: None,
            api_key_env: ENV_API_KEY.into(),
            timeout_secs: 60.0,
            max_retries: 3,
            temperature: 0.0,
            backoff_base_ms: 500,
            script: None,
        }
    }
}

impl BackendConfig {
    pub fn scripted(path: impl Into<PathBuf>) -> Self {
        BackendConfig {
            kind: "scripted".into(),
            script: Some(path.into()),
            ..BackendConfig::default()
        }
    }

    pub fn http(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        BackendConfig {
            base_url: Some(base_url.into()),
            model: Some(model.into()),
            ..BackendConfig::default()
        }
    }

    /// Fills `base_url` and `model` from the environment when unset.
    pub fn with_env(mut self) -> Self {
        if self.base_url.is_none() {
            self.base_url = std::env::var(ENV_BASE_URL).ok().filter(|s| !s.is_empty());
        }
        if self.model.is_none() {
            self.model = std::env::var(ENV_MODEL).ok().filter(|s| !s.is_empty());
        }
        self
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |m: &str| Err(BackendError::Config(m.to_string()));
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout must be positive");
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return bad("temperature must be a non-negative number");
        }
        if self.kind == "http" {
            if self.base_url.as_deref().is_none_or(str::is_empty) {
                return bad("http backend needs base_url");
            }
            if self.model.as_deref().is_none_or(str::is_empty) {
                return bad("http backend needs model");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = BackendConfig::default();
        assert_eq!(c.temperature, 0.0);
        assert!(c.validate().is_err());
        assert!(BackendConfig::http("http://x", "m").validate().is_ok());
        let c = BackendConfig {
            timeout_secs: 0.0,
            ..BackendConfig::http("http://x", "m")
        };
        assert!(c.validate().is_err());
        assert!(BackendConfig::scripted("s.yaml").validate().is_ok());
    }

    #[test]
    fn parses_from_json() {
        let c: BackendConfig =
            serde_json::from_str(r#"{"kind":"http","base_url":"http://h","model":"m","max_retries":1}"#).unwrap();
        assert_eq!(c.max_retries, 1);
        assert_eq!(c.api_key_env, ENV_API_KEY);
    }
}
