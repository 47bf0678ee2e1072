//! The loop's explicit state: one labeled phase per transition, so the whole
//! run can be driven either monolithically or one observable step at a time.

use crate::context::GlobalResearchContext;
use crate::orchestrator::record::{RunRecord, TerminationReason};
use crate::planner::{ReflectionDecision, ResearchPlan};
use crate::report::Report;
use crate::search::SearchQuery;

/// Which transition fires next. Phases carry the data produced by the
/// previous transition so each step is self-contained.
#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    /// Curate the initial plan.
    Plan,
    /// Generate the next search query (loop entry point).
    Query,
    /// Search, fan out candidates, and merge for this query.
    Answer { query: SearchQuery },
    /// Review the plan against the context.
    Reflect,
    /// Apply (or reject) the reflection decision. `degraded` marks decisions
    /// substituted after a reflection failure.
    Update { decision: ReflectionDecision, degraded: bool },
    /// Judge progress and decide: another iteration, or the report.
    Assess,
    /// Write the final report, then stop.
    Report { reason: TerminationReason },
    /// Terminal; stepping again is a caller bug.
    Done,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Plan => "Plan",
            Phase::Query => "Query",
            Phase::Answer { .. } => "Answer",
            Phase::Reflect => "Reflect",
            Phase::Update { .. } => "Update",
            Phase::Assess => "Assess",
            Phase::Report { .. } => "Report",
            Phase::Done => "Done",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Phase::Done)
    }
}

/// Complete state of one run between transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopState {
    pub ctx: GlobalResearchContext,
    /// The live plan, including done-bookkeeping; `None` until curation.
    pub plan: Option<ResearchPlan>,
    pub record: RunRecord,
    pub phase: Phase,
    pub report: Option<Report>,
    /// Back-to-back iterations lost to query dedup exhaustion; two in a row
    /// abort the run.
    pub(super) consecutive_dedup_exhaustions: u32,
}

impl LoopState {
    pub(super) fn new(ctx: GlobalResearchContext, record: RunRecord, phase: Phase) -> Self {
        LoopState {
            ctx,
            plan: None,
            record,
            phase,
            report: None,
            consecutive_dedup_exhaustions: 0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.phase.is_terminal()
    }

    /// Iteration number for events emitted while the current loop pass is
    /// still in flight (1-based).
    pub(super) fn current_iteration(&self) -> u64 {
        self.record.iterations_completed + 1
    }
}
