//! On-disk persistence for research runs.
//!
//! One run = one self-describing JSON document carrying a schema version,
//! the run's status, an optional copy of the configuration it started with,
//! and the full context. Loading validates structure (schema version, seq_no
//! contiguity) so a resumed run never starts from silently corrupt memory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::GlobalResearchContext;
use crate::orchestrator::{OrchestratorConfig, TerminationReason};

/// Format version written by this build. Bump on breaking layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Where the run stands, as recorded at the last checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    /// Mid-loop checkpoint; the loop resumes at query generation.
    InProgress { iterations_completed: u64 },
    /// The run finished (successfully or not) and must not be resumed.
    Terminal { reason: TerminationReason, final_progress: f64 },
}

impl RunStatus {
    pub fn is_terminal(&self) -> bool {
        matches!(self, RunStatus::Terminal { .. })
    }
}

/// The complete persisted document for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextFile {
    pub schema_version: u32,
    pub status: RunStatus,
    /// Configuration the run started with, so `resume` can reuse it without
    /// the operator restating flags. Absent for contexts built in-process.
    pub config: Option<OrchestratorConfig>,
    pub context: GlobalResearchContext,
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("context file does not parse: {0}")]
    Malformed(String),
    #[error("context file has schema version {found}, this build reads {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("context file is inconsistent: {0}")]
    Inconsistent(String),
}

impl ContextFile {
    pub fn new(
        status: RunStatus,
        config: Option<OrchestratorConfig>,
        context: GlobalResearchContext,
    ) -> Self {
        ContextFile { schema_version: SCHEMA_VERSION, status, config, context }
    }

    /// Write atomically: serialize to a sibling temp file, then rename over
    /// the target, so an interrupt never leaves a half-written document.
    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| PersistError::Malformed(format!("serialization failed: {e}")))?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, json).map_err(|e| PersistError::Io {
            path: tmp.display().to_string(),
            source: e,
        })?;
        fs::rename(&tmp, path).map_err(|e| PersistError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self, PersistError> {
        let text = fs::read_to_string(path).map_err(|e| PersistError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        // serde_json names the offending field and position in its message.
        let file: ContextFile = serde_json::from_str(&text)
            .map_err(|e| PersistError::Malformed(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(PersistError::VersionMismatch {
                found: file.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), PersistError> {
        if self.context.topic().trim().is_empty() {
            return Err(PersistError::Inconsistent("field `context.topic` is empty".into()));
        }
        for (i, t) in self.context.trajectories().iter().enumerate() {
            let expected = (i + 1) as u64;
            if t.seq_no != expected {
                return Err(PersistError::Inconsistent(format!(
                    "field `context.trajectories[{i}].seq_no` is {}, expected {expected} (sequence must be 1..N with no gaps)",
                    t.seq_no
                )));
            }
        }
        Ok(())
    }
}

/// Convenience wrappers for contexts that don't need status/config metadata.
impl GlobalResearchContext {
    /// Persist this context alone, marked in-progress at its current depth.
    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        let iterations = self.trajectories().len() as u64;
        ContextFile::new(
            RunStatus::InProgress { iterations_completed: iterations },
            None,
            self.clone(),
        )
        .save(path)
    }

    /// Load a context saved by [`GlobalResearchContext::save`] or by the
    /// orchestrator, ignoring status/config metadata.
    pub fn load(path: &Path) -> Result<Self, PersistError> {
        Ok(ContextFile::load(path)?.context)
    }
}
