//! The planning agent: initial plan curation, reflection against the
//! research context, runtime plan edits, and progress judgment.
//!
//! The plan is the loop's steering object. It is created once, then each
//! iteration may edit it (add / cancel / reprioritize steps) based on what
//! the searches actually found, and an LLM-as-judge scores how complete the
//! research is — that percentage is the loop's halting signal.

mod edits;

pub use edits::{apply_edits, EditError};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{render_context, GlobalResearchContext, RenderError};
use crate::gateway::{
    ChatRequest, DecodingParams, Gateway, GatewayError, StructuredOutput,
};
use crate::prompts::{render, PromptSet};

/// Lifecycle of a plan step. `Done` is bookkeeping set by the orchestrator
/// when a trajectory cites the step; termination is decided exclusively by
/// the progress judge, never by step completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Pending,
    Done,
    Cancelled,
}

/// One step of the research plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    /// Opaque token, unique within the plan (`s1`, `s2`, ...).
    pub id: String,
    pub description: String,
    pub status: StepStatus,
    /// Order among non-cancelled steps (0-based). Cancelled steps keep their
    /// last position but no longer participate in the ordering.
    pub position: usize,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("research topic must be non-empty")]
    EmptyTopic,
    #[error("plan is invalid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// Versioned, ordered list of research steps.
///
/// The version increments by exactly one on each applied reflection update;
/// cancelled steps are retained forever (history is part of the record).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearchPlan {
    topic: String,
    version: u32,
    steps: Vec<PlanStep>,
}

impl ResearchPlan {
    /// Build a version-1 plan from step descriptions, assigning ids and
    /// positions in the given order.
    pub fn from_steps(topic: impl Into<String>, descriptions: Vec<String>) -> Result<Self, PlanError> {
        let topic = topic.into();
        if topic.trim().is_empty() {
            return Err(PlanError::EmptyTopic);
        }
        if descriptions.is_empty() {
            return Err(PlanError::Invalid("a plan needs at least one step".into()));
        }
        let steps = descriptions
            .into_iter()
            .enumerate()
            .map(|(i, description)| PlanStep {
                id: format!("s{}", i + 1),
                description,
                status: StepStatus::Pending,
                position: i,
            })
            .collect();
        Ok(ResearchPlan { topic, version: 1, steps })
    }

    /// Build a plan from explicit parts, validating the structural
    /// invariants (unique ids; active positions form 0..k-1).
    pub fn from_parts(
        topic: impl Into<String>,
        version: u32,
        steps: Vec<PlanStep>,
    ) -> Result<Self, PlanError> {
        let plan = ResearchPlan { topic: topic.into(), version, steps };
        plan.check_invariants()?;
        Ok(plan)
    }

    fn check_invariants(&self) -> Result<(), PlanError> {
        if self.topic.trim().is_empty() {
            return Err(PlanError::EmptyTopic);
        }
        if self.version < 1 {
            return Err(PlanError::Invalid("version must be >= 1".into()));
        }
        let mut ids: Vec<&str> = self.steps.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(PlanError::Invalid("step ids must be unique".into()));
        }
        let mut positions: Vec<usize> = self
            .steps
            .iter()
            .filter(|s| s.status != StepStatus::Cancelled)
            .map(|s| s.position)
            .collect();
        positions.sort_unstable();
        if positions.iter().enumerate().any(|(i, p)| i != *p) {
            return Err(PlanError::Invalid(
                "active step positions must form a permutation of 0..k-1".into(),
            ));
        }
        Ok(())
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    /// All steps in storage order, cancelled included.
    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    /// Non-cancelled steps, sorted by position.
    pub fn active_steps(&self) -> Vec<&PlanStep> {
        let mut active: Vec<&PlanStep> =
            self.steps.iter().filter(|s| s.status != StepStatus::Cancelled).collect();
        active.sort_by_key(|s| s.position);
        active
    }

    pub fn has_pending_steps(&self) -> bool {
        self.steps.iter().any(|s| s.status == StepStatus::Pending)
    }

    pub fn step(&self, id: &str) -> Option<&PlanStep> {
        self.steps.iter().find(|s| s.id == id)
    }

    /// Mark a pending step done (orchestrator bookkeeping after a trajectory
    /// cites it). No version bump — this is not a reflection edit. Returns
    /// whether anything changed.
    pub fn mark_done(&mut self, step_id: &str) -> bool {
        match self.steps.iter_mut().find(|s| s.id == step_id) {
            Some(step) if step.status == StepStatus::Pending => {
                step.status = StepStatus::Done;
                true
            }
            _ => false,
        }
    }

    /// Next unused `s<N>` id, scanning all steps including cancelled ones.
    pub(crate) fn fresh_id_seq(&self) -> u64 {
        self.steps
            .iter()
            .filter_map(|s| s.id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()))
            .max()
            .unwrap_or(0)
            + 1
    }

    #[cfg(test)]
    pub(crate) fn steps_mut_for_tests(&mut self) -> &mut Vec<PlanStep> {
        &mut self.steps
    }

    #[cfg(test)]
    pub(crate) fn bump_version_for_tests(&mut self) {
        self.version += 1;
    }
}

/// Deterministic text listing of a plan for prompts and inspection: active
/// steps by position (with ids, so reflection can reference them), then
/// cancelled steps.
pub fn render_plan(plan: &ResearchPlan) -> String {
    let mut out = format!("Plan version {} for topic: {}\n", plan.version(), plan.topic());
    for step in plan.active_steps() {
        let marker = match step.status {
            StepStatus::Pending => "pending",
            StepStatus::Done => "done",
            StepStatus::Cancelled => unreachable!("active_steps filters cancelled"),
        };
        out.push_str(&format!(
            "  {}. [{marker}] ({}) {}\n",
            step.position, step.id, step.description
        ));
    }
    let cancelled: Vec<&PlanStep> =
        plan.steps().iter().filter(|s| s.status == StepStatus::Cancelled).collect();
    if !cancelled.is_empty() {
        out.push_str("Cancelled steps:\n");
        for step in cancelled {
            out.push_str(&format!("  - [cancelled] ({}) {}\n", step.id, step.description));
        }
    }
    out
}

/// One plan edit proposed by reflection, applied in list order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum PlanEdit {
    /// Insert a new pending step at `position` (clamped to the active list
    /// length — model-produced indices are unreliable).
    Add { description: String, position: usize },
    /// Cancel an existing, non-cancelled step.
    Cancel { step_id: String },
    /// Move an existing, non-cancelled step to `new_position` among active
    /// steps (clamped like Add).
    Reprioritize { step_id: String, new_position: usize },
}

/// Reflection verdict: keep the plan, or apply the listed edits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionDecision {
    pub update_needed: bool,
    pub rationale: String,
    #[serde(default)]
    pub edits: Vec<PlanEdit>,
}

impl ReflectionDecision {
    /// The no-change decision.
    pub fn no_op(rationale: impl Into<String>) -> Self {
        ReflectionDecision { update_needed: false, rationale: rationale.into(), edits: vec![] }
    }
}

impl StructuredOutput for ReflectionDecision {
    const SCHEMA_ID: &'static str = "reflection-decision";

    fn validate(&self) -> Result<(), String> {
        if !self.update_needed && !self.edits.is_empty() {
            return Err("update_needed is false but edits is non-empty".into());
        }
        for edit in &self.edits {
            match edit {
                PlanEdit::Add { description, .. } if description.trim().is_empty() => {
                    return Err("add edit has an empty description".into());
                }
                PlanEdit::Cancel { step_id } | PlanEdit::Reprioritize { step_id, .. }
                    if step_id.trim().is_empty() =>
                {
                    return Err("edit references an empty step_id".into());
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// The judge's estimate of research completion, driving loop termination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressAssessment {
    /// Percent complete in [0, 100] as stored; the judge's raw value is
    /// clamped on receipt if the model strays.
    pub percent: f64,
    pub rationale: String,
    #[serde(default)]
    pub unexplored_areas: Vec<String>,
}

impl StructuredOutput for ProgressAssessment {
    const SCHEMA_ID: &'static str = "progress-assessment";

    fn validate(&self) -> Result<(), String> {
        // Out-of-range finite values are accepted here and clamped by
        // `assess_progress` (with the clamp recorded); only non-numeric
        // nonsense triggers repair.
        if !self.percent.is_finite() {
            return Err("percent must be a finite number".into());
        }
        Ok(())
    }
}

/// Wire shape of the plan-curation call.
#[derive(Debug, Deserialize)]
pub struct PlanOutline {
    pub steps: Vec<String>,
}

impl StructuredOutput for PlanOutline {
    const SCHEMA_ID: &'static str = "plan";

    fn validate(&self) -> Result<(), String> {
        if self.steps.is_empty() {
            return Err("plan must contain at least one step".into());
        }
        if self.steps.iter().any(|s| s.trim().is_empty()) {
            return Err("plan steps must be non-empty".into());
        }
        Ok(())
    }
}

/// The planning agent. Holds the gateway and prompt set; every operation is
/// one structured LLM call plus deterministic post-processing.
pub struct Planner {
    gateway: Arc<Gateway>,
    prompts: Arc<PromptSet>,
    max_repair_attempts: u32,
}

impl Planner {
    pub fn new(gateway: Arc<Gateway>, prompts: Arc<PromptSet>, max_repair_attempts: u32) -> Self {
        Planner { gateway, prompts, max_repair_attempts }
    }

    /// Create the initial plan for a topic (one `plan`-schema call).
    pub fn curate_plan(&self, topic: &str) -> Result<ResearchPlan, PlanError> {
        if topic.trim().is_empty() {
            return Err(PlanError::EmptyTopic);
        }
        let prompt = render(&self.prompts.plan, &[("topic", topic)]);
        let request = ChatRequest::new(
            "You are a research planning agent.",
            prompt,
            DecodingParams::conservative(),
            2048,
            "plan",
        )?;
        let outline: PlanOutline =
            self.gateway.complete_structured(&request, self.max_repair_attempts)?;
        ResearchPlan::from_steps(topic, outline.steps)
    }

    /// Review the plan against the context (one `reflection-decision`
    /// call). Callers decide how to treat failures; the orchestrator
    /// degrades them to a no-op decision.
    pub fn reflect(
        &self,
        plan: &ResearchPlan,
        ctx: &GlobalResearchContext,
        context_budget: usize,
    ) -> Result<ReflectionDecision, PlanError> {
        let context_text = render_context(ctx, context_budget)?;
        let prompt = render(
            &self.prompts.reflection,
            &[("context", &context_text), ("plan", &render_plan(plan))],
        );
        let request = ChatRequest::new(
            "You are a research planning agent reviewing your own plan.",
            prompt,
            DecodingParams::conservative(),
            2048,
            "reflection",
        )?;
        Ok(self.gateway.complete_structured(&request, self.max_repair_attempts)?)
    }

    /// Judge research progress (one `progress-assessment` call).
    ///
    /// Never fails: a structured-output or rendering failure degrades to
    /// percent 0 with rationale "assessment failed" — the conservative
    /// reading that keeps the loop researching (the iteration cap still
    /// bounds the run).
    pub fn assess_progress(
        &self,
        plan: &ResearchPlan,
        ctx: &GlobalResearchContext,
        context_budget: usize,
    ) -> ProgressAssessment {
        let attempt = || -> Result<ProgressAssessment, PlanError> {
            let context_text = render_context(ctx, context_budget)?;
            let prompt = render(
                &self.prompts.progress,
                &[("context", &context_text), ("plan", &render_plan(plan))],
            );
            let request = ChatRequest::new(
                "You are a strict judge of research completeness.",
                prompt,
                DecodingParams::conservative(),
                1024,
                "progress",
            )?;
            Ok(self.gateway.complete_structured(&request, self.max_repair_attempts)?)
        };
        match attempt() {
            Ok(raw) => clamp_assessment(raw),
            Err(err) => {
                log::warn!("progress assessment failed, judging 0%: {err}");
                ProgressAssessment {
                    percent: 0.0,
                    rationale: format!("assessment failed: {err}"),
                    unexplored_areas: vec![],
                }
            }
        }
    }
}

/// Clamp a raw judged percent into [0, 100], recording any clamp in the
/// rationale so the audit trail shows the model strayed.
fn clamp_assessment(raw: ProgressAssessment) -> ProgressAssessment {
    let clamped = raw.percent.clamp(0.0, 100.0);
    if clamped == raw.percent {
        raw
    } else {
        ProgressAssessment {
            percent: clamped,
            rationale: format!("{} [percent clamped from {}]", raw.rationale, raw.percent),
            unexplored_areas: raw.unexplored_areas,
        }
    }
}
