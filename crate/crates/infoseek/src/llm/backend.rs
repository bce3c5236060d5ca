use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::limiter::RateLimiter;

pub const DEFAULT_KEY_ENV: &str = "INFOSEEK_API_KEY";

/// Where and how to reach an OpenAI-compatible chat-completions endpoint.
///
/// The API key is never part of this struct: only the name of the environment
/// variable holding it, so configs can be written into run headers safely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    /// Base URL up to (not including) `/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Passed through unmodified; `None` leaves the server default.
    pub temperature: Option<f64>,
    /// Shared cap across all sessions in the process.
    pub requests_per_second: Option<f64>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "https://openrouter.ai/api/v1".into(),
            model: "openai/gpt-4o".into(),
            api_key_env: DEFAULT_KEY_ENV.into(),
            timeout_secs: 60,
            max_retries: 3,
            temperature: None,
            requests_per_second: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("API key variable {0} is not set")]
    MissingKey(String),
    #[error("request failed: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Response(String),
    #[error("no cassette entry for request")]
    CassetteMiss,
    #[error("cassette: {0}")]
    Cassette(String),
    #[error("could not parse model output: {0}")]
    Parse(String),
}

/// Anything that turns a chat request into the assistant's reply text.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, AdapterError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, AdapterError> {
        (**self).complete(request)
    }
}

/// Bearer token read from the environment. Debug output is redacted.
#[derive(Clone)]
struct ApiKey(String);

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

/// Blocking HTTP client with retry on transport errors, 429 and 5xx.
#[derive(Debug)]
pub struct HttpBackend {
    url: String,
    key: ApiKey,
    agent: ureq::Agent,
    max_retries: u32,
    limiter: Option<Arc<RateLimiter>>,
}

impl HttpBackend {
    pub fn new(config: &EndpointConfig, limiter: Option<Arc<RateLimiter>>) -> Result<Self, AdapterError> {
        let key = std::env::var(&config.api_key_env)
            .map_err(|_| AdapterError::MissingKey(config.api_key_env.clone()))?;
        Ok(Self::with_key(config, key, limiter))
    }

    fn with_key(config: &EndpointConfig, key: String, limiter: Option<Arc<RateLimiter>>) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        HttpBackend {
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            key: ApiKey(key),
            agent,
            max_retries: config.max_retries,
            limiter,
        }
    }

    fn attempt(&self, request: &ChatRequest) -> Result<String, (AdapterError, bool)> {
        if let Some(l) = &self.limiter {
            l.acquire();
        }
        let resp = self
            .agent
            .post(&self.url)
            .set("Authorization", &format!("Bearer {}", self.key.0))
            .send_json(request);
        match resp {
            Ok(r) => {
                let body: CompletionResponse =
                    r.into_json().map_err(|e| (AdapterError::Response(e.to_string()), false))?;
                body.choices
                    .into_iter()
                    .next()
                    .and_then(|c| c.message.content)
                    .ok_or((AdapterError::Response("no choices".into()), false))
            }
            Err(ureq::Error::Status(status, r)) => {
                let body = r.into_string().unwrap_or_default();
                let retry = status == 429 || status >= 500;
                Err((AdapterError::Status { status, body: truncate(&body, 200) }, retry))
            }
            Err(e) => Err((AdapterError::Transport(e.kind().to_string()), true)),
        }
    }
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, AdapterError> {
        let mut delay = Duration::from_millis(500);
        let mut tries = 0;
        loop {
            match self.attempt(request) {
                Ok(text) => return Ok(text),
                Err((e, retry)) if retry && tries < self.max_retries => {
                    log::warn!("chat request failed ({e}); retrying in {delay:?}");
                    std::thread::sleep(delay);
                    delay *= 2;
                    tries += 1;
                }
                Err((e, _)) => return Err(e),
            }
        }
    }
}
