//! Deterministic provider that replays canned responses.
//!
//! A [`Script`] is a list of entries, each pairing a request-tag [`Matcher`]
//! with a [`ScriptedResponse`]. In [`ScriptMode::Sequential`] entries are
//! consumed strictly in order and each incoming request must match the next
//! entry; in [`ScriptMode::Keyed`] the first live entry whose matcher fits
//! the request tag is used. Scripts serialize to JSON so runs can ship their
//! transcripts as files.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatRequest, ChatResponse, FinishReason, LlmProvider, ProviderError};

/// Request-tag pattern: exact match, or prefix match with a trailing `*`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matcher(pub String);

impl Matcher {
    pub fn matches(&self, tag: &str) -> bool {
        match self.0.strip_suffix('*') {
            Some(prefix) => tag.starts_with(prefix),
            None => self.0 == tag,
        }
    }
}

/// What a script entry replies with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptedResponse {
    /// A fixed completion text.
    Text { text: String },
    /// Reply with the request's user prompt verbatim — handy for asserting
    /// what a component actually sent.
    EchoUserPrompt,
    /// Fail the call, optionally as a retryable transient error.
    Error { retryable: bool, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub matcher: Matcher,
    pub response: ScriptedResponse,
    /// Keyed mode only: a repeating entry is never consumed.
    #[serde(default)]
    pub repeat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptMode {
    Sequential,
    Keyed,
}

/// A full scripted transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub mode: ScriptMode,
    pub entries: Vec<ScriptEntry>,
}

impl Script {
    pub fn sequential() -> ScriptBuilder {
        ScriptBuilder { mode: ScriptMode::Sequential, entries: Vec::new() }
    }

    pub fn keyed() -> ScriptBuilder {
        ScriptBuilder { mode: ScriptMode::Keyed, entries: Vec::new() }
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

pub struct ScriptBuilder {
    mode: ScriptMode,
    entries: Vec<ScriptEntry>,
}

impl ScriptBuilder {
    pub fn text(self, matcher: &str, text: &str) -> Self {
        self.push(matcher, ScriptedResponse::Text { text: text.to_string() }, false)
    }

    pub fn repeat_text(self, matcher: &str, text: &str) -> Self {
        self.push(matcher, ScriptedResponse::Text { text: text.to_string() }, true)
    }

    pub fn echo(self, matcher: &str) -> Self {
        self.push(matcher, ScriptedResponse::EchoUserPrompt, false)
    }

    pub fn repeat_echo(self, matcher: &str) -> Self {
        self.push(matcher, ScriptedResponse::EchoUserPrompt, true)
    }

    pub fn error(self, matcher: &str, retryable: bool, message: &str) -> Self {
        self.push(
            matcher,
            ScriptedResponse::Error { retryable, message: message.to_string() },
            false,
        )
    }

    pub fn entry(mut self, entry: ScriptEntry) -> Self {
        self.entries.push(entry);
        self
    }

    fn push(mut self, matcher: &str, response: ScriptedResponse, repeat: bool) -> Self {
        self.entries.push(ScriptEntry {
            matcher: Matcher(matcher.to_string()),
            response,
            repeat,
        });
        self
    }

    pub fn build(self) -> Script {
        Script { mode: self.mode, entries: self.entries }
    }
}

/// Provider that answers from a [`Script`]. Any mismatch or exhaustion is a
/// [`ProviderError::Script`], surfacing scripting bugs loudly instead of
/// improvising.
pub struct ScriptedProvider {
    script: Script,
    state: Mutex<State>,
}

struct State {
    /// Sequential mode: index of the next entry to serve.
    cursor: usize,
    /// Keyed mode: which non-repeat entries have been consumed.
    consumed: Vec<bool>,
}

impl ScriptedProvider {
    pub fn new(script: Script) -> Self {
        let consumed = vec![false; script.entries.len()];
        ScriptedProvider { script, state: Mutex::new(State { cursor: 0, consumed }) }
    }

    /// Number of entries served so far (sequential mode cursor, or count of
    /// consumed keyed entries).
    pub fn served(&self) -> usize {
        let state = self.state.lock().expect("script state poisoned");
        match self.script.mode {
            ScriptMode::Sequential => state.cursor,
            ScriptMode::Keyed => state.consumed.iter().filter(|c| **c).count(),
        }
    }

    /// True when every non-repeat entry has been used exactly once.
    pub fn is_exhausted(&self) -> bool {
        let state = self.state.lock().expect("script state poisoned");
        match self.script.mode {
            ScriptMode::Sequential => state.cursor >= self.script.entries.len(),
            ScriptMode::Keyed => self
                .script
                .entries
                .iter()
                .zip(&state.consumed)
                .all(|(e, used)| e.repeat || *used),
        }
    }

    fn render(entry: &ScriptEntry, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        match &entry.response {
            ScriptedResponse::Text { text } => Ok(ChatResponse {
                text: text.clone(),
                finish_reason: FinishReason::Complete,
                provider_id: "scripted".into(),
            }),
            ScriptedResponse::EchoUserPrompt => Ok(ChatResponse {
                text: request.user_prompt.clone(),
                finish_reason: FinishReason::Complete,
                provider_id: "scripted".into(),
            }),
            ScriptedResponse::Error { retryable, message } => {
                if *retryable {
                    Err(ProviderError::Transient(message.clone()))
                } else {
                    Err(ProviderError::Fatal(message.clone()))
                }
            }
        }
    }
}

impl LlmProvider for ScriptedProvider {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        let mut state = self.state.lock().expect("script state poisoned");
        match self.script.mode {
            ScriptMode::Sequential => {
                let Some(entry) = self.script.entries.get(state.cursor) else {
                    return Err(ProviderError::Script(format!(
                        "script exhausted after {} entries; unmatched request tag `{}`",
                        self.script.entries.len(),
                        request.request_tag
                    )));
                };
                if !entry.matcher.matches(&request.request_tag) {
                    return Err(ProviderError::Script(format!(
                        "entry {} expects tag `{}` but got `{}`",
                        state.cursor, entry.matcher.0, request.request_tag
                    )));
                }
                state.cursor += 1;
                Self::render(entry, request)
            }
            ScriptMode::Keyed => {
                let found = self.script.entries.iter().enumerate().find(|(i, e)| {
                    (e.repeat || !state.consumed[*i]) && e.matcher.matches(&request.request_tag)
                });
                let Some((idx, entry)) = found else {
                    return Err(ProviderError::Script(format!(
                        "no live script entry matches request tag `{}`",
                        request.request_tag
                    )));
                };
                if !entry.repeat {
                    state.consumed[idx] = true;
                }
                Self::render(entry, request)
            }
        }
    }

    fn id(&self) -> &str {
        "scripted"
    }
}
