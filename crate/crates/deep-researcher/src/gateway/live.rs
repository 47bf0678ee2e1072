//! HTTP provider speaking the OpenAI-compatible chat-completions protocol.
//!
//! Works against any endpoint exposing `POST {base_url}/chat/completions`
//! with the usual message/choice shape. Timeouts, 429s, and 5xx responses
//! are reported as transient so the gateway's retry policy applies; other
//! failures are fatal.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ChatRequest, ChatResponse, FinishReason, LlmProvider, ProviderError};

#[derive(Clone)]
pub struct HttpProviderConfig {
    /// Endpoint root, e.g. `https://api.example.com/v1`.
    pub base_url: String,
    pub model: String,
    pub api_key: String,
    pub timeout: Duration,
    /// Whether the endpoint accepts a `top_k` field. OpenAI-protocol servers
    /// mostly do not; when false the field is omitted and the gateway notes
    /// the drop in its run log.
    pub supports_top_k: bool,
}

/// Manual impl so the API key never reaches logs or panic messages.
impl std::fmt::Debug for HttpProviderConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProviderConfig")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .field("api_key", &"[redacted]")
            .field("timeout", &self.timeout)
            .field("supports_top_k", &self.supports_top_k)
            .finish()
    }
}

impl HttpProviderConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, api_key: impl Into<String>) -> Self {
        HttpProviderConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key: api_key.into(),
            timeout: Duration::from_secs(120),
            supports_top_k: false,
        }
    }
}

pub struct HttpProvider {
    config: HttpProviderConfig,
    client: reqwest::blocking::Client,
    id: String,
}

impl std::fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProvider").field("config", &self.config).finish_non_exhaustive()
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: [WireMessage<'a>; 2],
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_k: Option<u32>,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    content: String,
}

impl HttpProvider {
    pub fn new(config: HttpProviderConfig) -> Result<Self, ProviderError> {
        if config.api_key.trim().is_empty() {
            return Err(ProviderError::Fatal("API key is empty".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ProviderError::Fatal(format!("cannot build HTTP client: {e}")))?;
        let id = format!("http:{}", config.model);
        Ok(HttpProvider { config, client, id })
    }
}

impl LlmProvider for HttpProvider {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = WireRequest {
            model: &self.config.model,
            messages: [
                WireMessage { role: "system", content: &request.system_prompt },
                WireMessage { role: "user", content: &request.user_prompt },
            ],
            temperature: request.decoding.temperature(),
            max_tokens: request.max_output_tokens,
            top_k: self.config.supports_top_k.then(|| request.decoding.top_k()),
        };

        let response = self
            .client
            .post(&url)
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() || e.is_connect() {
                    ProviderError::Transient(format!("request to {url} failed: {e}"))
                } else {
                    ProviderError::Fatal(format!("request to {url} failed: {e}"))
                }
            })?;

        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            let summary = format!("{url} returned {status}: {}", truncate(&text, 500));
            return if status.as_u16() == 429 || status.is_server_error() {
                Err(ProviderError::Transient(summary))
            } else {
                Err(ProviderError::Fatal(summary))
            };
        }

        let wire: WireResponse = response
            .json()
            .map_err(|e| ProviderError::Fatal(format!("malformed completion response: {e}")))?;
        let choice = wire
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| ProviderError::Fatal("completion response has no choices".into()))?;
        let finish_reason = match choice.finish_reason.as_deref() {
            Some("length") => FinishReason::Truncated,
            Some("error") => FinishReason::ProviderError,
            _ => FinishReason::Complete,
        };
        Ok(ChatResponse { text: choice.message.content, finish_reason, provider_id: self.id.clone() })
    }

    fn id(&self) -> &str {
        &self.id
    }

    fn supports_top_k(&self) -> bool {
        self.config.supports_top_k
    }
}

fn truncate(text: &str, max_chars: usize) -> &str {
    match text.char_indices().nth(max_chars) {
        Some((idx, _)) => &text[..idx],
        None => text,
    }
}
