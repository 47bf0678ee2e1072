//! Uniform chat-completion interface over interchangeable backends.
//!
//! A [`Gateway`] wraps any [`LlmProvider`] (live HTTP, scripted, recording)
//! and adds transport retries, an append-only run log, and structured-output
//! parsing with bounded repair. Decoding parameters travel with each request
//! and reach the provider verbatim.

mod live;
mod recording;
pub(crate) mod run_log;
mod scripted;
mod structured;

pub use live::{HttpProvider, HttpProviderConfig};
pub use recording::RecordingProvider;
pub use run_log::{read_log_file, RunLog, RunLogRecord};
pub use scripted::{Matcher, Script, ScriptEntry, ScriptedProvider, ScriptedResponse, ScriptMode};
pub use structured::{extract_json_block, parse_structured, StructuredOutput};

use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-call decoding parameters: sampling temperature and top-k cutoff.
///
/// Each crossover candidate carries its own pair so the candidates attend to
/// different parts of the search space at inference time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecodingParams")]
pub struct DecodingParams {
    temperature: f64,
    top_k: u32,
}

#[derive(Deserialize)]
struct RawDecodingParams {
    temperature: f64,
    top_k: u32,
}

impl TryFrom<RawDecodingParams> for DecodingParams {
    type Error = GatewayError;

    fn try_from(raw: RawDecodingParams) -> Result<Self, GatewayError> {
        DecodingParams::new(raw.temperature, raw.top_k)
    }
}

impl DecodingParams {
    /// Temperature must lie in `[0.0, 2.0]`; `top_k` must be at least 1.
    pub fn new(temperature: f64, top_k: u32) -> Result<Self, GatewayError> {
        if !(0.0..=2.0).contains(&temperature) || !temperature.is_finite() {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {temperature} outside [0.0, 2.0]"
            )));
        }
        if top_k < 1 {
            return Err(GatewayError::InvalidRequest("top_k must be >= 1".into()));
        }
        Ok(DecodingParams { temperature, top_k })
    }

    /// Low-temperature defaults for planner, judge, and merge calls.
    pub fn conservative() -> Self {
        DecodingParams { temperature: 0.2, top_k: 40 }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn top_k(&self) -> u32 {
        self.top_k
    }
}

/// One chat-completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub decoding: DecodingParams,
    pub max_output_tokens: u32,
    /// Label used for run-log records and script matching.
    pub request_tag: String,
}

impl ChatRequest {
    pub fn new(
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
        decoding: DecodingParams,
        max_output_tokens: u32,
        request_tag: impl Into<String>,
    ) -> Result<Self, GatewayError> {
        let req = ChatRequest {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            decoding,
            max_output_tokens,
            request_tag: request_tag.into(),
        };
        req.validate()?;
        Ok(req)
    }

    fn validate(&self) -> Result<(), GatewayError> {
        if self.system_prompt.trim().is_empty() || self.user_prompt.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("prompts must be non-empty".into()));
        }
        if self.max_output_tokens < 1 {
            return Err(GatewayError::InvalidRequest("max_output_tokens must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why generation stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Complete,
    Truncated,
    ProviderError,
}

/// One chat-completion response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub finish_reason: FinishReason,
    pub provider_id: String,
}

/// Transport-level failure, classified for retry.
#[derive(Debug, Error)]
pub enum ProviderError {
    /// Retryable blip (timeout, 429, 5xx).
    #[error("transient provider failure: {0}")]
    Transient(String),
    /// Non-retryable failure from the backend.
    #[error("provider failure: {0}")]
    Fatal(String),
    /// The scripted provider had no entry for this request — a test bug, not
    /// a runtime condition.
    #[error("script error: {0}")]
    Script(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Transient(_))
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("provider error after {attempts} attempt(s): {source}")]
    Provider {
        attempts: u32,
        #[source]
        source: ProviderError,
    },
    #[error("structured output for schema `{schema}` failed after {attempts} attempt(s): {last_error}; last raw text: {last_raw:?}")]
    StructuredOutput {
        schema: &'static str,
        attempts: u32,
        last_error: String,
        last_raw: String,
    },
}

/// A chat-completion backend. Implementations must be safe to call from
/// multiple in-flight candidates.
pub trait LlmProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError>;

    /// Identifier recorded in responses and logs.
    fn id(&self) -> &str;

    /// Whether the backend honors `top_k`. When it does not, the gateway
    /// notes "top_k unsupported, dropped" in the run log instead of failing.
    fn supports_top_k(&self) -> bool {
        true
    }
}

/// Retry policy for transient transport failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, base_delay: Duration::from_millis(500) }
    }
}

impl RetryPolicy {
    /// Zero-delay policy for tests and scripted runs.
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy { max_attempts, base_delay: Duration::ZERO }
    }
}

/// Provider wrapper adding retries, run logging, and structured outputs.
pub struct Gateway {
    provider: Arc<dyn LlmProvider>,
    retry: RetryPolicy,
    log: RunLog,
}

impl Gateway {
    pub fn new(provider: Arc<dyn LlmProvider>) -> Self {
        Gateway { provider, retry: RetryPolicy::default(), log: RunLog::new() }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Mirror every run-log record to a JSON-lines file.
    pub fn with_log_file(mut self, path: &std::path::Path) -> std::io::Result<Self> {
        self.log = self.log.with_sink(path)?;
        Ok(self)
    }

    pub fn provider(&self) -> &Arc<dyn LlmProvider> {
        &self.provider
    }

    /// The append-only log of every `complete` call issued.
    pub fn log(&self) -> &RunLog {
        &self.log
    }

    /// Issue one completion, retrying transient failures with exponential
    /// backoff. Exactly one run-log record is appended per call, success or
    /// failure.
    pub fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        self.complete_noted(request, None)
    }

    fn complete_noted(
        &self,
        request: &ChatRequest,
        note: Option<String>,
    ) -> Result<ChatResponse, GatewayError> {
        request.validate()?;
        let started = Instant::now();
        let mut note = note;
        if !self.provider.supports_top_k() {
            let drop_note = "top_k unsupported, dropped".to_string();
            note = Some(match note {
                Some(n) => format!("{n}; {drop_note}"),
                None => drop_note,
            });
        }

        let mut attempt = 0;
        let outcome = loop {
            attempt += 1;
            match self.provider.complete(request) {
                Ok(resp) => break Ok(resp),
                Err(err) if err.is_retryable() && attempt < self.retry.max_attempts => {
                    log::warn!(
                        "transient failure on `{}` (attempt {attempt}): {err}",
                        request.request_tag
                    );
                    let delay = self.retry.base_delay * 2u32.saturating_pow(attempt - 1);
                    if !delay.is_zero() {
                        thread::sleep(delay);
                    }
                }
                Err(err) => break Err(err),
            }
        };

        let elapsed_ms = started.elapsed().as_millis() as u64;
        match outcome {
            Ok(resp) => {
                let note = if attempt > 1 {
                    Some(match note {
                        Some(n) => format!("{n}; succeeded on attempt {attempt}"),
                        None => format!("succeeded on attempt {attempt}"),
                    })
                } else {
                    note
                };
                self.log.append(RunLogRecord::success(request, &resp, elapsed_ms, note));
                Ok(resp)
            }
            Err(err) => {
                self.log.append(RunLogRecord::failure(request, &err, attempt, elapsed_ms, note));
                Err(GatewayError::Provider { attempts: attempt, source: err })
            }
        }
    }

    /// Issue a completion whose reply must parse and validate as `T`.
    ///
    /// On a parse or validation failure the request is reissued with an
    /// appended repair instruction, up to `max_repair_attempts` times. The
    /// returned value always satisfies `T::validate`.
    pub fn complete_structured<T: StructuredOutput>(
        &self,
        request: &ChatRequest,
        max_repair_attempts: u32,
    ) -> Result<T, GatewayError> {
        let mut current = request.clone();
        let mut last_error = String::new();
        let mut last_raw = String::new();
        let attempts = max_repair_attempts + 1;

        for attempt in 1..=attempts {
            let note = (attempt > 1).then(|| {
                format!("repair attempt {} for schema `{}`", attempt - 1, T::SCHEMA_ID)
            });
            let resp = self.complete_noted(&current, note)?;
            match parse_structured::<T>(&resp.text) {
                Ok(value) => return Ok(value),
                Err(err) => {
                    log::debug!(
                        "schema `{}` attempt {attempt} failed validation: {err}",
                        T::SCHEMA_ID
                    );
                    last_raw = resp.text.clone();
                    last_error = err;
                    current.user_prompt = format!(
                        "{}\n\nYour previous reply was not a valid `{}` document: {}.\n\
                         Previous reply:\n{}\n\
                         Respond again with only a valid JSON document.",
                        request.user_prompt, T::SCHEMA_ID, last_error, resp.text
                    );
                }
            }
        }

        Err(GatewayError::StructuredOutput {
            schema: T::SCHEMA_ID,
            attempts,
            last_error,
            last_raw,
        })
    }
}
