//! The global research context: the run's entire memory.
//!
//! An append-only record of every search trajectory, plan version, and
//! progress judgment. The orchestrator is the single writer; everything else
//! reads snapshots. Past entries are never mutated — reflection and report
//! writing both depend on the full, unedited history.

mod persist;
mod render;

pub use persist::{ContextFile, PersistError, RunStatus};
pub use render::{estimate_tokens, min_render_budget, render_context, RenderError};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::{ProgressAssessment, ResearchPlan};
use crate::search::{RawSearchResult, SearchQuery};
use crate::searcher::{CandidateAnswer, SynthesizedAnswer};

/// One loop iteration's complete record: the query, the evidence that
/// survived filtering, every candidate's answer, and the merged synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Position in the run, starting at 1, no gaps.
    pub seq_no: u64,
    pub query: SearchQuery,
    /// Search results that passed the relevance filter.
    pub artifacts: Vec<RawSearchResult>,
    pub candidate_answers: Vec<CandidateAnswer>,
    pub synthesized_answer: SynthesizedAnswer,
    /// Set when the candidates had no artifacts to ground their answers.
    #[serde(default)]
    pub low_confidence: bool,
    pub created_at: DateTime<Utc>,
}

/// A plan snapshot with the reason it was recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanVersionRecord {
    pub plan: ResearchPlan,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("out-of-order trajectory: expected seq_no {expected}, got {got}")]
    OutOfOrderSeq { expected: u64, got: u64 },
}

/// Append-only memory for one research run.
///
/// Fields are private so every write goes through an appending method;
/// accessors hand out immutable views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResearchContext {
    topic: String,
    run_id: String,
    trajectories: Vec<Trajectory>,
    plan_versions: Vec<PlanVersionRecord>,
    progress_history: Vec<ProgressAssessment>,
}

impl GlobalResearchContext {
    pub fn new(topic: impl Into<String>, run_id: impl Into<String>) -> Self {
        GlobalResearchContext {
            topic: topic.into(),
            run_id: run_id.into(),
            trajectories: Vec::new(),
            plan_versions: Vec::new(),
            progress_history: Vec::new(),
        }
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn plan_versions(&self) -> &[PlanVersionRecord] {
        &self.plan_versions
    }

    pub fn progress_history(&self) -> &[ProgressAssessment] {
        &self.progress_history
    }

    /// The most recently recorded plan, if planning has happened.
    pub fn current_plan(&self) -> Option<&ResearchPlan> {
        self.plan_versions.last().map(|v| &v.plan)
    }

    /// Latest progress judgment, if any.
    pub fn latest_progress(&self) -> Option<&ProgressAssessment> {
        self.progress_history.last()
    }

    /// The seq_no the next trajectory must carry.
    pub fn next_seq_no(&self) -> u64 {
        self.trajectories.last().map_or(1, |t| t.seq_no + 1)
    }

    /// Append a trajectory; its seq_no must be exactly `next_seq_no`.
    pub fn append_trajectory(&mut self, trajectory: Trajectory) -> Result<(), ContextError> {
        let expected = self.next_seq_no();
        if trajectory.seq_no != expected {
            return Err(ContextError::OutOfOrderSeq { expected, got: trajectory.seq_no });
        }
        self.trajectories.push(trajectory);
        Ok(())
    }

    /// Record a plan snapshot (initial curation or a reflection update).
    pub fn record_plan_version(&mut self, plan: ResearchPlan, reason: impl Into<String>) {
        self.plan_versions.push(PlanVersionRecord { plan, reason: reason.into() });
    }

    /// Record a progress judgment. Kept as full history — the loop only
    /// reads the latest value, but the trail is what makes runs auditable.
    pub fn record_progress(&mut self, assessment: ProgressAssessment) {
        self.progress_history.push(assessment);
    }

    /// True iff the normalized probe text equals the normalized text of any
    /// stored trajectory query. This is the hard dedup guard behind the
    /// prompt-level "avoid redundant queries" instruction.
    pub fn has_query(&self, query_text: &str) -> bool {
        let probe = normalize_query(query_text);
        self.trajectories.iter().any(|t| normalize_query(&t.query.text) == probe)
    }
}

/// Canonical form for query comparison: case-folded, trimmed, internal
/// whitespace collapsed to single spaces.
pub fn normalize_query(text: &str) -> String {
    text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}
