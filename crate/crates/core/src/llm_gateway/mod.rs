//! One client contract for external generation and embedding endpoints,
//! with a scripted, network-free mock behind the same interface.

pub mod mock;
pub mod schema;
pub mod transport;

use std::path::PathBuf;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{build_with_transport, prompt_hash, MockEntry, MockGateway};
pub use schema::{parse_answer, parse_decomposition, AnswerReply, DecomposedTurn};
pub use transport::{HttpReply, Transport, UreqTransport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    QuestionGen,
    AnswerGen,
    Decomposer,
    QaAssistant,
    PersonaExpand,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::QuestionGen, Role::AnswerGen, Role::Decomposer, Role::QaAssistant, Role::PersonaExpand];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::QuestionGen => "question_gen",
            Role::AnswerGen => "answer_gen",
            Role::Decomposer => "decomposer",
            Role::QaAssistant => "qa_assistant",
            Role::PersonaExpand => "persona_expand",
        }
    }

    /// Roles whose replies are machine-parsed.
    pub fn is_structured(&self) -> bool {
        matches!(self, Role::AnswerGen | Role::Decomposer | Role::PersonaExpand)
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRequest {
    pub role: Role,
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub structured: bool,
}

impl GenRequest {
    pub fn new(role: Role, prompt: impl Into<String>) -> Self {
        Self { role, prompt: prompt.into(), max_tokens: 1024, temperature: 0.0, structured: role.is_structured() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reply {
    pub text: String,
    /// Round trips made, including the successful one (0 in mock mode).
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 4, base_backoff_ms: 500 }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based): `base * 2^retry`,
    /// saturating, so delays never decrease.
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.min(32)).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_backoff_ms.saturating_mul(factor))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub endpoint: Option<String>,
    /// Embedding endpoint; defaults to `{endpoint}/embed`.
    pub embed_endpoint: Option<String>,
    /// Name of the environment variable holding the bearer token.
    pub auth_env: Option<String>,
    pub timeout_ms: u64,
    pub retry: RetryPolicy,
    pub mock_mode: bool,
    pub mock_script: Option<PathBuf>,
    /// Dimension of mock embeddings.
    pub mock_embed_dim: usize,
    pub max_in_flight: usize,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            embed_endpoint: None,
            auth_env: None,
            timeout_ms: 60_000,
            retry: RetryPolicy::default(),
            mock_mode: false,
            mock_script: None,
            mock_embed_dim: 64,
            max_in_flight: 8,
        }
    }
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.mock_mode {
            if self.mock_script.is_none() {
                return Err(GatewayError::Config("mock mode requires a mock script".into()));
            }
        } else if self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(GatewayError::Config("live mode requires an endpoint".into()));
        }
        if self.max_in_flight == 0 {
            return Err(GatewayError::Config("max_in_flight must be at least 1".into()));
        }
        if self.mock_embed_dim == 0 {
            return Err(GatewayError::Config("mock_embed_dim must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("gateway failed after {attempts} attempt(s): {reason}")]
    Failure { attempts: u32, reason: String, retryable: bool },
    #[error("malformed {role} reply: {reason}")]
    Parse { role: Role, reason: String, raw: String },
    #[error("mock script has no reply for {role} prompt {hash}")]
    MockMiss { role: Role, hash: String },
    #[error("gateway configuration: {0}")]
    Config(String),
}

impl GatewayError {
    /// Whether repeating the same call later could succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, GatewayError::Failure { retryable: true, .. })
    }
}

/// A generation and embedding backend.
pub trait Gateway: Send + Sync {
    fn generate(&self, req: &GenRequest) -> Result<Reply, GatewayError>;
    /// One unit vector per text, in input order.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError>;
}

/// L2-normalize in place; zero or non-finite vectors are rejected.
pub fn normalize(mut v: Vec<f64>) -> Result<Vec<f64>, String> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err("embedding has zero or non-finite norm".into());
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
pub struct InFlightLimiter {
    max: usize,
    count: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a InFlightLimiter);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut c = self.0.count.lock().unwrap_or_else(|e| e.into_inner());
        *c -= 1;
        self.0.freed.notify_one();
    }
}

impl InFlightLimiter {
    pub fn new(max: usize) -> Self {
        Self { max: max.max(1), count: Mutex::new(0), freed: Condvar::new() }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut c = self.count.lock().unwrap_or_else(|e| e.into_inner());
        while *c >= self.max {
            c = self.freed.wait(c).unwrap_or_else(|e| e.into_inner());
        }
        *c += 1;
        Permit(self)
    }

    pub fn in_flight(&self) -> usize {
        *self.count.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Live client: JSON over HTTP with bounded retries.
pub struct LiveGateway {
    cfg: GatewayConfig,
    transport: Arc<dyn Transport>,
    limiter: Arc<InFlightLimiter>,
}

impl LiveGateway {
    pub fn new(cfg: GatewayConfig) -> Result<Self, GatewayError> {
        let transport = Arc::new(UreqTransport::new(Duration::from_millis(cfg.timeout_ms)));
        Self::with_transport(cfg, transport)
    }

    pub fn with_transport(cfg: GatewayConfig, transport: Arc<dyn Transport>) -> Result<Self, GatewayError> {
        if cfg.mock_mode {
            return Err(GatewayError::Config("live gateway built from a mock-mode config".into()));
        }
        cfg.validate()?;
        let limiter = Arc::new(InFlightLimiter::new(cfg.max_in_flight));
        Ok(Self { cfg, transport, limiter })
    }

    fn auth(&self) -> Option<String> {
        self.cfg.auth_env.as_ref().and_then(|name| std::env::var(name).ok())
    }

    /// POST with retries on transport errors, 429 and 5xx.
    fn post(&self, url: &str, body: &serde_json::Value) -> Result<(String, u32), GatewayError> {
        let auth = self.auth();
        let mut attempts = 0;
        loop {
            attempts += 1;
            let outcome = {
                let _permit = self.limiter.acquire();
                self.transport.post(url, body, auth.as_deref())
            };
            let (retryable, reason) = match outcome {
                Ok(HttpReply { status, body }) if (200..300).contains(&status) => return Ok((body, attempts)),
                Ok(HttpReply { status, body }) => {
                    (status == 429 || status >= 500, format!("HTTP {status}: {}", body.chars().take(200).collect::<String>()))
                }
                Err(e) => (true, e),
            };
            if !retryable || attempts > self.cfg.retry.max_retries {
                return Err(GatewayError::Failure { attempts, reason, retryable });
            }
            let delay = self.cfg.retry.delay(attempts - 1);
            log::warn!("gateway attempt {attempts} failed ({reason}); retrying in {delay:?}");
            std::thread::sleep(delay);
        }
    }
}

impl Gateway for LiveGateway {
    fn generate(&self, req: &GenRequest) -> Result<Reply, GatewayError> {
        let url = self.cfg.endpoint.as_deref().unwrap_or_default();
        let body = serde_json::json!({
            "role": req.role,
            "prompt": req.prompt,
            "params": {"max_tokens": req.max_tokens, "temperature": req.temperature, "structured": req.structured},
        });
        let (raw, attempts) = self.post(url, &body)?;
        Ok(Reply { text: reply_text(&raw), attempts })
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let url = match &self.cfg.embed_endpoint {
            Some(u) => u.clone(),
            None => format!("{}/embed", self.cfg.endpoint.as_deref().unwrap_or_default().trim_end_matches('/')),
        };
        let (raw, attempts) = self.post(&url, &serde_json::json!({ "texts": texts }))?;
        schema::parse_embeddings(&raw, texts.len())
            .map_err(|reason| GatewayError::Failure { attempts, reason, retryable: false })
    }
}

/// A `{"text": ...}` envelope is unwrapped; any other body (a role-schema
/// object) is passed through verbatim.
fn reply_text(raw: &str) -> String {
    match serde_json::from_str::<serde_json::Value>(raw) {
        Ok(serde_json::Value::Object(map)) if map.len() == 1 => match map.get("text") {
            Some(serde_json::Value::String(s)) => s.clone(),
            _ => raw.to_string(),
        },
        _ => raw.to_string(),
    }
}

/// Build the gateway selected by `cfg`.
pub fn from_config(cfg: &GatewayConfig) -> Result<Arc<dyn Gateway>, GatewayError> {
    build_with_transport(cfg, Arc::new(UreqTransport::new(Duration::from_millis(cfg.timeout_ms))))
}
