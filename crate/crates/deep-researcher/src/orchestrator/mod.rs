//! The sequential research loop: plan once, then iterate
//! query → answer → reflect → update → assess until the progress judge meets
//! the threshold or the iteration cap fires, then write the report once.
//!
//! The loop is strictly sequential by design — each iteration conditions on
//! everything learned so far through the shared context. The only internal
//! parallelism permitted anywhere is the candidate fan-out inside a single
//! answer step.

mod record;
mod state;

pub use record::{EventKind, EventRecord, RunRecord, TerminationReason};
pub use state::{LoopState, Phase};

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::context::{ContextFile, GlobalResearchContext, RunStatus};
use crate::gateway::Gateway;
use crate::planner::{apply_edits, Planner, ReflectionDecision, ResearchPlan};
use crate::prompts::PromptSet;
use crate::report::{Report, ReportWriter};
use crate::search::{SearchClient, SearchConfig};
use crate::searcher::{CrossoverConfig, Searcher, SearcherError};

/// Everything that tunes a run. Serializable so runs can be launched from a
/// config file and resumed with the configuration they started with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrchestratorConfig {
    /// Judged progress percent at which the loop stops (inclusive: an
    /// assessment of exactly this value halts).
    pub progress_threshold: f64,
    /// Unconditional cap on loop iterations.
    pub max_iterations: u64,
    /// Extra query-generation attempts allowed when the model repeats an
    /// already-searched query.
    pub dedup_retry_limit: u32,
    /// Estimated-token budget for context renderings in prompts.
    pub context_budget: usize,
    /// Bounded re-asks for malformed structured outputs.
    pub max_repair_attempts: u32,
    pub search: SearchConfig,
    pub crossover: CrossoverConfig,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            progress_threshold: 90.0,
            max_iterations: 15,
            dedup_retry_limit: 2,
            context_budget: 24_000,
            max_repair_attempts: 2,
            search: SearchConfig::default(),
            crossover: CrossoverConfig::default(),
        }
    }
}

impl OrchestratorConfig {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if !(self.progress_threshold > 0.0 && self.progress_threshold <= 100.0) {
            return Err(OrchestratorError::InvalidConfig(format!(
                "progress_threshold {} outside (0, 100]",
                self.progress_threshold
            )));
        }
        if self.max_iterations < 1 {
            return Err(OrchestratorError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.context_budget < 1 {
            return Err(OrchestratorError::InvalidConfig("context_budget must be >= 1".into()));
        }
        self.search
            .validate()
            .map_err(|e| OrchestratorError::InvalidConfig(e.to_string()))?;
        self.crossover
            .validate()
            .map_err(|e| OrchestratorError::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

/// The backends a run needs: one LLM gateway, one search client, the prompt
/// set, and a clock (injectable so scripted runs are fully deterministic).
pub struct Deps {
    pub gateway: Arc<Gateway>,
    pub search: Arc<SearchClient>,
    pub prompts: Arc<PromptSet>,
    pub clock: Arc<dyn Clock>,
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("invalid orchestrator config: {0}")]
    InvalidConfig(String),
    #[error("run is already terminal; stepping it again is a caller bug")]
    AlreadyTerminal,
    #[error("cannot resume: {0}")]
    CannotResume(String),
}

/// Everything a finished run hands back. Failure is encoded in the record
/// (`termination_reason` / `failure`) rather than an `Err`, because even an
/// aborted run yields a context worth keeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub context: GlobalResearchContext,
    pub plan: Option<ResearchPlan>,
    pub record: RunRecord,
    pub report: Option<Report>,
}

pub struct Orchestrator {
    config: OrchestratorConfig,
    planner: Planner,
    searcher: Searcher,
    writer: ReportWriter,
    clock: Arc<dyn Clock>,
    /// When set, the context file is checkpointed here after planning, after
    /// every assessment, and at termination — the resume points.
    checkpoint_path: Option<PathBuf>,
}

impl Orchestrator {
    pub fn new(config: OrchestratorConfig, deps: Deps) -> Result<Self, OrchestratorError> {
        config.validate()?;
        let planner = Planner::new(
            deps.gateway.clone(),
            deps.prompts.clone(),
            config.max_repair_attempts,
        );
        let searcher = Searcher::new(
            deps.gateway.clone(),
            deps.search.clone(),
            deps.prompts.clone(),
            deps.clock.clone(),
            config.max_repair_attempts,
        );
        let writer = ReportWriter::new(deps.gateway, deps.prompts, deps.clock.clone());
        Ok(Orchestrator {
            config,
            planner,
            searcher,
            writer,
            clock: deps.clock,
            checkpoint_path: None,
        })
    }

    pub fn with_checkpoint(mut self, path: PathBuf) -> Self {
        self.checkpoint_path = Some(path);
        self
    }

    pub fn config(&self) -> &OrchestratorConfig {
        &self.config
    }

    /// Fresh state for a new run, positioned at the Plan transition.
    ///
    /// The run id is derived from the topic and the clock, so runs under a
    /// fixed clock (scripted tests) are fully reproducible.
    pub fn init_state(&self, topic: &str) -> LoopState {
        let run_id = format!(
            "run-{}",
            crate::gateway::run_log::content_hash(&format!(
                "{topic}@{}",
                self.clock.now().to_rfc3339()
            ))
        );
        let ctx = GlobalResearchContext::new(topic, run_id.clone());
        LoopState::new(ctx, RunRecord::new(run_id), Phase::Plan)
    }

    /// Rebuild loop state from a checkpoint file so the run continues from
    /// the interruption point (always a Query transition — checkpoints are
    /// written only at iteration boundaries).
    pub fn state_from_checkpoint(&self, file: &ContextFile) -> Result<LoopState, OrchestratorError> {
        let iterations_completed = match file.status {
            RunStatus::Terminal { .. } => {
                return Err(OrchestratorError::CannotResume("run is already terminal".into()));
            }
            RunStatus::InProgress { iterations_completed } => iterations_completed,
        };
        let plan = file.context.current_plan().cloned().ok_or_else(|| {
            OrchestratorError::CannotResume("checkpoint has no plan; nothing to continue".into())
        })?;
        let mut record = RunRecord::new(file.context.run_id());
        record.iterations_completed = iterations_completed;
        record.final_progress = file.context.latest_progress().map_or(0.0, |p| p.percent);
        let mut state = LoopState::new(file.context.clone(), record, Phase::Query);
        state.plan = Some(plan);
        Ok(state)
    }

    /// Advance exactly one labeled transition. Errors only when the state is
    /// already terminal; every runtime failure folds into the state (abort
    /// path) so the caller always gets the full record back.
    pub fn step(&self, mut state: LoopState) -> Result<LoopState, OrchestratorError> {
        let phase = std::mem::replace(&mut state.phase, Phase::Done);
        match phase {
            Phase::Plan => self.do_plan(state),
            Phase::Query => self.do_query(state),
            Phase::Answer { query } => self.do_answer(state, query),
            Phase::Reflect => self.do_reflect(state),
            Phase::Update { decision, degraded } => self.do_update(state, decision, degraded),
            Phase::Assess => self.do_assess(state),
            Phase::Report { reason } => self.do_report(state, reason),
            Phase::Done => Err(OrchestratorError::AlreadyTerminal),
        }
    }

    /// Run a topic end to end. Equivalent to iterating [`Self::step`] from
    /// [`Self::init_state`] until terminal.
    pub fn run(&self, topic: &str) -> RunOutput {
        let state = self.init_state(topic);
        self.drive(state)
    }

    /// Drive any state (fresh or resumed) to termination.
    pub fn drive(&self, mut state: LoopState) -> RunOutput {
        while !state.is_terminal() {
            state = self.step(state).expect("non-terminal state always steps");
        }
        RunOutput {
            context: state.ctx,
            plan: state.plan,
            record: state.record,
            report: state.report,
        }
    }

    fn do_plan(&self, mut state: LoopState) -> Result<LoopState, OrchestratorError> {
        match self.planner.curate_plan(state.ctx.topic()) {
            Ok(plan) => {
                state.ctx.record_plan_version(plan.clone(), "initial curation");
                state.record.push_event(
                    EventKind::Plan,
                    0,
                    format!("plan v{} with {} steps", plan.version(), plan.steps().len()),
                );
                state.plan = Some(plan);
                state.phase = Phase::Query;
                self.checkpoint(&state);
                Ok(state)
            }
            Err(err) => {
                state.record.push_event(EventKind::Plan, 0, format!("failed: {err}"));
                Ok(self.abort(state, format!("plan curation failed: {err}")))
            }
        }
    }

    fn do_query(&self, mut state: LoopState) -> Result<LoopState, OrchestratorError> {
        let iteration = state.current_iteration();
        let plan = state.plan.as_ref().expect("Query phase requires a plan");
        match self.searcher.generate_query(
            plan,
            &state.ctx,
            self.config.context_budget,
            self.config.dedup_retry_limit,
        ) {
            Ok(query) => {
                state.consecutive_dedup_exhaustions = 0;
                state.record.push_event(EventKind::Query, iteration, query.text.clone());
                state.phase = Phase::Answer { query };
                Ok(state)
            }
            Err(SearcherError::DedupExhausted { attempts }) => {
                state.consecutive_dedup_exhaustions += 1;
                if state.consecutive_dedup_exhaustions >= 2 {
                    state.record.push_event(
                        EventKind::Query,
                        iteration,
                        format!("dedup exhausted after {attempts} attempt(s); second in a row"),
                    );
                    return Ok(self.abort(
                        state,
                        "two consecutive iterations produced only already-searched queries"
                            .to_string(),
                    ));
                }
                // The iteration is consumed: skip straight to reflection so
                // the planner can steer out of the rut; no trajectory is
                // recorded for this pass.
                state.record.push_event(
                    EventKind::Query,
                    iteration,
                    format!(
                        "dedup exhausted after {attempts} attempt(s); proceeding to reflection"
                    ),
                );
                state.phase = Phase::Reflect;
                Ok(state)
            }
            Err(err) => {
                state
                    .record
                    .push_event(EventKind::Query, iteration, format!("failed: {err}"));
                Ok(self.abort(state, format!("query generation failed: {err}")))
            }
        }
    }

    fn do_answer(
        &self,
        mut state: LoopState,
        query: crate::search::SearchQuery,
    ) -> Result<LoopState, OrchestratorError> {
        let iteration = state.current_iteration();
        match self.searcher.answer_query(query, &self.config.search, &self.config.crossover) {
            Ok(trajectory) => {
                let cited_step = trajectory.query.plan_step_ref.clone();
                let detail = format!(
                    "{} artifacts, {} candidates{}",
                    trajectory.artifacts.len(),
                    trajectory.candidate_answers.len(),
                    if trajectory.low_confidence { ", low confidence" } else { "" }
                );
                state
                    .ctx
                    .append_trajectory(trajectory)
                    .expect("query seq_no was taken from this context");
                // Bookkeeping: a trajectory citing a plan step marks it done.
                // Recorded as a snapshot (same version) so resume sees it.
                if let Some(step_id) = cited_step {
                    let plan = state.plan.as_mut().expect("Answer phase requires a plan");
                    if plan.mark_done(&step_id) {
                        state.ctx.record_plan_version(
                            plan.clone(),
                            format!("step {step_id} marked done by search {}", iteration),
                        );
                    }
                }
                state.record.push_event(EventKind::Answer, iteration, detail);
                state.phase = Phase::Reflect;
                Ok(state)
            }
            Err(err) => {
                state
                    .record
                    .push_event(EventKind::Answer, iteration, format!("failed: {err}"));
                Ok(self.abort(state, format!("research step failed: {err}")))
            }
        }
    }

    fn do_reflect(&self, mut state: LoopState) -> Result<LoopState, OrchestratorError> {
        let iteration = state.current_iteration();
        let plan = state.plan.as_ref().expect("Reflect phase requires a plan");
        match self.planner.reflect(plan, &state.ctx, self.config.context_budget) {
            Ok(decision) => {
                state.record.push_event(
                    EventKind::Reflect,
                    iteration,
                    format!(
                        "update_needed={}, {} edit(s)",
                        decision.update_needed,
                        decision.edits.len()
                    ),
                );
                state.phase = Phase::Update { decision, degraded: false };
                Ok(state)
            }
            Err(err) => {
                // Plan continuity is always a valid state: a failed
                // reflection degrades to "no change needed".
                log::warn!("reflection failed, keeping the plan: {err}");
                state.record.push_event(
                    EventKind::Reflect,
                    iteration,
                    format!("failed ({err}); treated as no change needed"),
                );
                let decision = ReflectionDecision::no_op(format!("reflection failed: {err}"));
                state.phase = Phase::Update { decision, degraded: true };
                Ok(state)
            }
        }
    }

    fn do_update(
        &self,
        mut state: LoopState,
        decision: ReflectionDecision,
        degraded: bool,
    ) -> Result<LoopState, OrchestratorError> {
        let iteration = state.current_iteration();
        let plan = state.plan.as_ref().expect("Update phase requires a plan");
        let detail = if decision.update_needed {
            match apply_edits(plan, &decision) {
                Ok(updated) => {
                    let detail = format!("plan updated to v{}", updated.version());
                    state.ctx.record_plan_version(updated.clone(), decision.rationale.clone());
                    state.plan = Some(updated);
                    detail
                }
                Err(err) => {
                    // Transactional: a bad edit rejects the whole decision.
                    log::warn!("plan edits rejected: {err}");
                    format!("decision rejected ({err}); plan unchanged")
                }
            }
        } else if degraded {
            "plan kept (reflection degraded)".to_string()
        } else {
            "no change needed".to_string()
        };
        state.record.push_event(EventKind::Update, iteration, detail);
        state.phase = Phase::Assess;
        Ok(state)
    }

    fn do_assess(&self, mut state: LoopState) -> Result<LoopState, OrchestratorError> {
        let iteration = state.current_iteration();
        let plan = state.plan.as_ref().expect("Assess phase requires a plan");
        let assessment =
            self.planner.assess_progress(plan, &state.ctx, self.config.context_budget);
        state.record.final_progress = assessment.percent;
        state.record.iterations_completed = iteration;
        state.record.push_event(
            EventKind::Assess,
            iteration,
            format!("progress {}%", assessment.percent),
        );
        state.ctx.record_progress(assessment.clone());

        if assessment.percent >= self.config.progress_threshold {
            state.phase = Phase::Report { reason: TerminationReason::ThresholdReached };
        } else if iteration >= self.config.max_iterations {
            state.phase = Phase::Report { reason: TerminationReason::MaxIterationsExhausted };
        } else {
            state.phase = Phase::Query;
        }
        self.checkpoint(&state);
        Ok(state)
    }

    fn do_report(
        &self,
        mut state: LoopState,
        reason: TerminationReason,
    ) -> Result<LoopState, OrchestratorError> {
        state.record.termination_reason = Some(reason);
        let partial = reason == TerminationReason::AbortedError;
        let plan = state.plan.as_ref().expect("Report phase requires a plan");
        match self.writer.generate_report(plan, &state.ctx, self.config.context_budget) {
            Ok(mut report) => {
                report.partial_flag = partial;
                state.record.push_event(
                    EventKind::Report,
                    state.record.iterations_completed,
                    format!(
                        "report generated ({} sources{})",
                        report.sources.len(),
                        if partial { ", partial" } else { "" }
                    ),
                );
                state.report = Some(report);
            }
            Err(err) => {
                // The context survives even when the writer does not; the
                // caller still receives (and persists) the full memory.
                log::error!("report generation failed: {err}");
                state.record.push_event(
                    EventKind::Report,
                    state.record.iterations_completed,
                    format!("failed: {err}"),
                );
                let note = format!("report generation failed: {err}");
                state.record.failure = Some(match state.record.failure.take() {
                    Some(prev) => format!("{prev}; {note}"),
                    None => note,
                });
            }
        }
        state.phase = Phase::Done;
        self.checkpoint(&state);
        Ok(state)
    }

    /// Fold an unrecoverable failure into the state: record it, then write a
    /// best-effort partial report if any research exists, else finish.
    fn abort(&self, mut state: LoopState, failure: String) -> LoopState {
        log::error!("run aborted: {failure}");
        state.record.failure = Some(match state.record.failure.take() {
            Some(prev) => format!("{prev}; {failure}"),
            None => failure,
        });
        state.record.termination_reason = Some(TerminationReason::AbortedError);
        if state.ctx.trajectories().is_empty() || state.plan.is_none() {
            state.phase = Phase::Done;
            self.checkpoint(&state);
        } else {
            state.phase = Phase::Report { reason: TerminationReason::AbortedError };
        }
        state
    }

    /// Persist the context file at a resume point. Checkpoint I/O failures
    /// are logged, not fatal — the run itself still holds all state.
    fn checkpoint(&self, state: &LoopState) {
        let Some(path) = &self.checkpoint_path else { return };
        let status = match state.record.termination_reason {
            Some(reason) if state.is_terminal() => RunStatus::Terminal {
                reason,
                final_progress: state.record.final_progress,
            },
            _ => RunStatus::InProgress {
                iterations_completed: state.record.iterations_completed,
            },
        };
        let file = ContextFile::new(status, Some(self.config.clone()), state.ctx.clone());
        if let Err(err) = file.save(path) {
            log::error!("checkpoint write failed (run continues): {err}");
        }
    }
}
