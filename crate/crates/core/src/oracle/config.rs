use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::model::SituationLabel;

pub const ENV_ENDPOINT: &str = "GSW_ENDPOINT";
pub const ENV_API_KEY: &str = "GSW_API_KEY";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Mock,
    Remote,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Decoding {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for Decoding {
    fn default() -> Self {
        Decoding { temperature: 0.0, max_tokens: 1024 }
    }
}

/// Bounded exponential backoff: attempt `i` (0-based) waits
/// `base_delay_ms * 2^i` before the next try.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay_ms: 250 }
    }
}

impl RetryPolicy {
    pub fn delay_ms(&self, attempt: u32) -> u64 {
        self.base_delay_ms.saturating_mul(1u64 << attempt.min(16))
    }
}

/// Everything needed to stand up a generation or reconciliation backend:
/// where it lives, which adapter and prompt template it uses, and how it
/// decodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model_name: String,
    pub prompt_template_id: String,
    pub situation: SituationLabel,
    pub decoding: Decoding,
    pub adapter_id: Option<String>,
    /// Ask for the whole instance in one call instead of five staged calls.
    pub single_call: bool,
    pub retry: RetryPolicy,
    pub timeout_ms: u64,
    /// Extra fixture store for the mock backend (JSONL).
    pub fixtures: Option<PathBuf>,
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            endpoint: None,
            model_name: "gsw-mock".to_string(),
            prompt_template_id: "gsw-staged-v1".to_string(),
            situation: SituationLabel::crime_and_justice(),
            decoding: Decoding::default(),
            adapter_id: None,
            single_call: false,
            retry: RetryPolicy::default(),
            timeout_ms: 60_000,
            fixtures: None,
            api_key: None,
        }
    }
}

impl BackendConfig {
    pub fn mock(situation: SituationLabel) -> Self {
        BackendConfig { situation, ..Default::default() }
    }

    pub fn remote(endpoint: impl Into<String>, situation: SituationLabel) -> Self {
        BackendConfig {
            kind: BackendKind::Remote,
            endpoint: Some(endpoint.into()),
            model_name: "gsw-remote".to_string(),
            situation,
            ..Default::default()
        }
    }

    /// Remote config from `GSW_ENDPOINT` / `GSW_API_KEY`.
    pub fn remote_from_env(situation: SituationLabel) -> Result<Self, OracleError> {
        let endpoint = std::env::var(ENV_ENDPOINT)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .ok_or_else(|| OracleError::Config(format!("{ENV_ENDPOINT} is not set")))?;
        let mut cfg = Self::remote(endpoint, situation);
        cfg.api_key = std::env::var(ENV_API_KEY).ok().filter(|s| !s.is_empty());
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.kind == BackendKind::Remote {
            match self.endpoint.as_deref() {
                Some(e) if e.starts_with("http://") || e.starts_with("https://") => {}
                Some(e) => {
                    return Err(OracleError::Config(format!("endpoint {e:?} is not an http(s) URL")))
                }
                None => return Err(OracleError::Config("remote backend requires an endpoint".into())),
            }
        }
        if !(self.decoding.temperature >= 0.0 && self.decoding.temperature.is_finite()) {
            return Err(OracleError::Config(format!(
                "temperature must be >= 0, got {}",
                self.decoding.temperature
            )));
        }
        if self.decoding.max_tokens == 0 {
            return Err(OracleError::Config("max_tokens must be positive".into()));
        }
        if self.timeout_ms == 0 {
            return Err(OracleError::Config("timeout must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn endpoint_url(&self, path: &str) -> Result<String, OracleError> {
        let base = self
            .endpoint
            .as_deref()
            .ok_or_else(|| OracleError::Config("remote backend requires an endpoint".into()))?;
        Ok(format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/')))
    }
}
