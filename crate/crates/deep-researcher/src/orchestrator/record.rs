//! Run audit records: the per-transition event log and the run summary.

use serde::{Deserialize, Serialize};

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// The progress judge met the threshold (inclusive comparison).
    ThresholdReached,
    /// The unconditional iteration cap fired first.
    MaxIterationsExhausted,
    /// An unrecoverable step error ended the run early.
    AbortedError,
}

/// The seven labeled transitions of the research loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Plan,
    Query,
    Answer,
    Reflect,
    Update,
    Assess,
    Report,
}

impl EventKind {
    /// Single-letter label used for compact transition-pattern checks
    /// (P Q A R U S T for Plan..Report).
    pub fn letter(&self) -> char {
        match self {
            EventKind::Plan => 'P',
            EventKind::Query => 'Q',
            EventKind::Answer => 'A',
            EventKind::Reflect => 'R',
            EventKind::Update => 'U',
            EventKind::Assess => 'S',
            EventKind::Report => 'T',
        }
    }
}

/// One logged transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventKind,
    /// Loop iteration the event belongs to; 0 for planning, and the final
    /// iteration count for the report event.
    pub iteration: u64,
    pub detail: String,
}

/// Summary and audit trail of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub iterations_completed: u64,
    /// `None` while the run is still in flight.
    pub termination_reason: Option<TerminationReason>,
    /// Latest judged progress percent.
    pub final_progress: f64,
    pub events: Vec<EventRecord>,
    /// Description of the failure that aborted the run, when one did.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn new(run_id: impl Into<String>) -> Self {
        RunRecord {
            run_id: run_id.into(),
            iterations_completed: 0,
            termination_reason: None,
            final_progress: 0.0,
            events: Vec::new(),
            failure: None,
        }
    }

    pub(crate) fn push_event(&mut self, kind: EventKind, iteration: u64, detail: impl Into<String>) {
        self.events.push(EventRecord { kind, iteration, detail: detail.into() });
    }

    /// The event log as a compact transition string, e.g. `PQARUSQARUST`.
    pub fn transition_string(&self) -> String {
        self.events.iter().map(|e| e.kind.letter()).collect()
    }
}
