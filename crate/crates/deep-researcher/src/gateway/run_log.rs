//! Append-only log of every completion call a gateway issues.
//!
//! Records carry content hashes rather than full prompts so the log stays
//! small and safe to ship; an optional JSON-lines sink mirrors records to
//! disk for `inspect`-style tooling.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatRequest, ChatResponse, DecodingParams, GatewayError};

/// One completion call, success or terminal failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogRecord {
    pub tag: String,
    pub decoding: DecodingParams,
    /// Truncated SHA-256 of `system_prompt\n---\nuser_prompt`.
    pub prompt_hash: String,
    /// Truncated SHA-256 of the response text; `None` on failure.
    pub response_hash: Option<String>,
    pub elapsed_ms: u64,
    pub ok: bool,
    /// Free-form annotations: retry outcomes, repair attempts, dropped
    /// parameters, failure reasons.
    pub note: Option<String>,
}

impl RunLogRecord {
    pub(super) fn success(
        request: &ChatRequest,
        response: &ChatResponse,
        elapsed_ms: u64,
        note: Option<String>,
    ) -> Self {
        RunLogRecord {
            tag: request.request_tag.clone(),
            decoding: request.decoding,
            prompt_hash: content_hash(&format!(
                "{}\n---\n{}",
                request.system_prompt, request.user_prompt
            )),
            response_hash: Some(content_hash(&response.text)),
            elapsed_ms,
            ok: true,
            note,
        }
    }

    pub(super) fn failure(
        request: &ChatRequest,
        error: &super::ProviderError,
        attempts: u32,
        elapsed_ms: u64,
        note: Option<String>,
    ) -> Self {
        let failure_note = format!("failed after {attempts} attempt(s): {error}");
        RunLogRecord {
            tag: request.request_tag.clone(),
            decoding: request.decoding,
            prompt_hash: content_hash(&format!(
                "{}\n---\n{}",
                request.system_prompt, request.user_prompt
            )),
            response_hash: None,
            elapsed_ms,
            ok: false,
            note: Some(match note {
                Some(n) => format!("{n}; {failure_note}"),
                None => failure_note,
            }),
        }
    }
}

/// Truncated SHA-256 hex digest (16 chars) used to correlate log records
/// without storing content.
pub(crate) fn content_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

/// In-memory record list with an optional JSONL mirror on disk.
pub struct RunLog {
    records: Mutex<Vec<RunLogRecord>>,
    sink: Option<Mutex<File>>,
}

impl RunLog {
    pub fn new() -> Self {
        RunLog { records: Mutex::new(Vec::new()), sink: None }
    }

    pub(super) fn with_sink(self, path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RunLog { records: self.records, sink: Some(Mutex::new(file)) })
    }

    pub fn append(&self, record: RunLogRecord) {
        if let Some(sink) = &self.sink {
            let line = serde_json::to_string(&record).expect("run log record serializes");
            let mut file = sink.lock().expect("run log sink poisoned");
            if let Err(err) = writeln!(file, "{line}") {
                log::warn!("failed to mirror run log record: {err}");
            }
        }
        self.records.lock().expect("run log poisoned").push(record);
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("run log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> Vec<RunLogRecord> {
        self.records.lock().expect("run log poisoned").clone()
    }
}

impl Default for RunLog {
    fn default() -> Self {
        Self::new()
    }
}

/// Parse a JSONL run-log file back into records, for inspection tooling.
pub fn read_log_file(path: &Path) -> Result<Vec<RunLogRecord>, GatewayError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GatewayError::InvalidRequest(format!("cannot read run log: {e}")))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            serde_json::from_str(line)
                .map_err(|e| GatewayError::InvalidRequest(format!("malformed run log line: {e}")))
        })
        .collect()
}
