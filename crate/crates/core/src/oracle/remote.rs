//! HTTP client for a remote inference service.
//!
//! `POST {endpoint}/generate` and `POST {endpoint}/reconcile`, JSON in and
//! out, bearer auth when an API key is configured. 408, 429, 5xx, timeouts
//! and connection failures are retried with exponential backoff; any other
//! 4xx is returned immediately.

use std::time::Duration;

use serde_json::{json, Value};

use super::config::{BackendConfig, BackendKind};
use super::{OracleBackend, OracleRequest, RawOracleOutput};
use crate::error::OracleError;

#[derive(Clone, Debug)]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    config: BackendConfig,
}

enum Attempt {
    Done(Value),
    Retry(String),
}

impl HttpTransport {
    pub fn new(config: BackendConfig) -> Result<Self, OracleError> {
        config.validate()?;
        if config.kind != BackendKind::Remote {
            return Err(OracleError::Config("HTTP transport requires a remote backend config".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| OracleError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(HttpTransport { client, config })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// Posts `body` to `{endpoint}/{path}` and returns the decoded JSON reply.
    pub fn post_json(&self, path: &str, body: &Value) -> Result<Value, OracleError> {
        let url = self.config.endpoint_url(path)?;
        let retry = &self.config.retry;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let message = match self.attempt(&url, body)? {
                Attempt::Done(v) => return Ok(v),
                Attempt::Retry(m) => m,
            };
            if attempts > retry.max_retries {
                return Err(OracleError::Transport { attempts, message });
            }
            let delay = retry.delay_ms(attempts - 1);
            log::warn!("{url}: {message}; retrying in {delay} ms (attempt {attempts})");
            std::thread::sleep(Duration::from_millis(delay));
        }
    }

    fn attempt(&self, url: &str, body: &Value) -> Result<Attempt, OracleError> {
        let mut req = self.client.post(url).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Ok(Attempt::Retry(e.to_string())),
        };
        let status = resp.status();
        if status.is_success() {
            return match resp.json::<Value>() {
                Ok(v) => Ok(Attempt::Done(v)),
                Err(e) if e.is_timeout() => Ok(Attempt::Retry(e.to_string())),
                Err(e) => Err(OracleError::Decode(e.to_string())),
            };
        }
        let code = status.as_u16();
        let text = resp.text().unwrap_or_default();
        if status.is_server_error() || code == 408 || code == 429 {
            Ok(Attempt::Retry(format!("HTTP {code}: {text}")))
        } else {
            Err(OracleError::Rejected { status: code, body: text })
        }
    }
}

/// Body of a `/generate` call.
pub fn generate_request_body(cfg: &BackendConfig, req: &OracleRequest) -> Value {
    json!({
        "model": cfg.model_name,
        "adapter": cfg.adapter_id,
        "situation": req.situation.as_str(),
        "stage": req.stage.as_str(),
        "context": req.context,
        "partial": serde_json::to_value(&req.conditioning).expect("fragment serializes"),
        "temperature": cfg.decoding.temperature,
        "max_tokens": cfg.decoding.max_tokens,
    })
}

#[derive(Clone, Debug)]
pub struct RemoteBackend {
    transport: HttpTransport,
}

impl RemoteBackend {
    pub fn new(config: BackendConfig) -> Result<Self, OracleError> {
        Ok(RemoteBackend { transport: HttpTransport::new(config)? })
    }

    pub fn transport(&self) -> &HttpTransport {
        &self.transport
    }
}

impl OracleBackend for RemoteBackend {
    fn complete(&self, req: &OracleRequest) -> Result<RawOracleOutput, OracleError> {
        let body = generate_request_body(self.transport.config(), req);
        let reply = self.transport.post_json("generate", &body)?;
        let text = reply
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| OracleError::Decode(format!("expected {{\"text\": str}}, got {reply}")))?;
        Ok(RawOracleOutput::from_text(text))
    }
}

/// One `/generate` round trip.
pub fn call_remote(cfg: &BackendConfig, req: &OracleRequest) -> Result<RawOracleOutput, OracleError> {
    RemoteBackend::new(cfg.clone())?.complete(req)
}
