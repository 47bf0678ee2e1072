//! Operator surface behind the command-line binary: provider wiring, output
//! files, and the `run` / `resume` / `inspect` commands.
//!
//! Credentials are read from environment variables only — never from flags or
//! config files. Configuration precedence is flags > config file > (stored
//! config on resume) > built-in defaults. No network request is made before
//! the manifest and configuration validate.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::clock::{Clock, FixedClock, SystemClock};
use crate::context::{ContextFile, RunStatus};
use crate::gateway::{
    Gateway, HttpProvider, HttpProviderConfig, LlmProvider, Script, ScriptedProvider,
};
use crate::orchestrator::{Deps, Orchestrator, OrchestratorConfig, RunOutput, TerminationReason};
use crate::planner::{render_plan, ResearchPlan, StepStatus};
use crate::prompts::PromptSet;
use crate::report::render_markdown;
use crate::search::{FixtureStore, SearchBackend, SearchClient, TavilyBackend, TavilyConfig};
use crate::searcher::CrossoverConfig;

/// Environment variable holding the LLM API key (live and fixtures modes).
pub const LLM_API_KEY_ENV: &str = "DEEP_RESEARCH_LLM_API_KEY";
/// Environment variable holding the chat-completions base URL.
pub const LLM_BASE_URL_ENV: &str = "DEEP_RESEARCH_LLM_BASE_URL";
/// Environment variable naming the model to request.
pub const LLM_MODEL_ENV: &str = "DEEP_RESEARCH_LLM_MODEL";
/// Environment variable holding the web-search API key (live mode).
pub const SEARCH_API_KEY_ENV: &str = "DEEP_RESEARCH_SEARCH_API_KEY";
/// Optional override for the web-search endpoint.
pub const SEARCH_BASE_URL_ENV: &str = "DEEP_RESEARCH_SEARCH_BASE_URL";

/// Which backends a run talks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderSelection {
    /// Live LLM over HTTP and live web search. Needs credentials.
    Live,
    /// Scripted LLM transcript and recorded search fixtures; fully
    /// deterministic (fixed clock), no credentials, no network.
    Scripted,
    /// Live LLM but recorded search fixtures — replays searches while still
    /// exercising the real model.
    Fixtures,
}

impl FromStr for ProviderSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(ProviderSelection::Live),
            "scripted" => Ok(ProviderSelection::Scripted),
            "fixtures" => Ok(ProviderSelection::Fixtures),
            other => Err(format!("unknown provider {other:?}; expected live, scripted, or fixtures")),
        }
    }
}

/// Flag-level overrides applied on top of the config file (or, on resume,
/// the stored configuration).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConfigOverrides {
    pub max_iterations: Option<u64>,
    pub threshold: Option<f64>,
    pub candidates: Option<usize>,
}

impl ConfigOverrides {
    fn apply(&self, mut config: OrchestratorConfig) -> OrchestratorConfig {
        if let Some(n) = self.max_iterations {
            config.max_iterations = n;
        }
        if let Some(t) = self.threshold {
            config.progress_threshold = t;
        }
        if let Some(c) = self.candidates {
            config.crossover = CrossoverConfig::with_candidate_count(c);
        }
        config
    }
}

/// Everything `run` needs: the topic plus provider and output plumbing.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub topic: String,
    pub out_dir: PathBuf,
    pub provider: ProviderSelection,
    /// TOML file mirroring [`OrchestratorConfig`]; missing keys fall back to
    /// built-in defaults.
    pub config_file: Option<PathBuf>,
    /// JSON transcript for the scripted provider.
    pub script: Option<PathBuf>,
    /// Directory of recorded search results (scripted and fixtures modes).
    pub fixtures_dir: Option<PathBuf>,
    /// Directory of prompt templates; built-in templates when absent.
    pub prompts_dir: Option<PathBuf>,
    pub overrides: ConfigOverrides,
}

/// Everything `resume` needs. Output files go next to the context file
/// unless `out_dir` says otherwise; the stored configuration is reused
/// unless a config file or flag overrides it.
#[derive(Debug, Clone)]
pub struct ResumeManifest {
    pub context_path: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub provider: ProviderSelection,
    pub config_file: Option<PathBuf>,
    pub script: Option<PathBuf>,
    pub fixtures_dir: Option<PathBuf>,
    pub prompts_dir: Option<PathBuf>,
    pub overrides: ConfigOverrides,
}

/// Command failure, split by exit-code class: usage/configuration problems
/// exit 1, aborted runs exit 2 (success — a report was produced — exits 0).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("run aborted: {0}")]
    Aborted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Aborted(_) => 2,
        }
    }
}

/// Where a finished run left its files, plus the in-memory output.
#[derive(Debug)]
pub struct RunArtifacts {
    pub output: RunOutput,
    pub context_path: PathBuf,
    pub events_path: PathBuf,
    /// Absent when the run ended without a report.
    pub report_path: Option<PathBuf>,
    pub llm_log_path: PathBuf,
}

/// Run a research task end-to-end and write `context.json`, `events.jsonl`,
/// `report.md`, and `llm_calls.jsonl` into the output directory.
pub fn cmd_run(manifest: &RunManifest) -> Result<RunArtifacts, CliError> {
    if manifest.topic.trim().is_empty() {
        return Err(CliError::Usage("topic must not be empty".into()));
    }
    prepare_out_dir(&manifest.out_dir)?;
    let config = load_config(manifest.config_file.as_deref(), None, &manifest.overrides)?;
    let deps = build_deps(
        manifest.provider,
        manifest.script.as_deref(),
        manifest.fixtures_dir.as_deref(),
        manifest.prompts_dir.as_deref(),
        &manifest.out_dir,
    )?;
    let orchestrator = Orchestrator::new(config.clone(), deps)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_checkpoint(manifest.out_dir.join("context.json"));
    let output = orchestrator.run(&manifest.topic);
    finish(output, config, &manifest.out_dir)
}

/// Continue an interrupted run from its context file to completion.
pub fn cmd_resume(manifest: &ResumeManifest) -> Result<RunArtifacts, CliError> {
    let file = ContextFile::load(&manifest.context_path)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let out_dir = match &manifest.out_dir {
        Some(dir) => dir.clone(),
        None => manifest
            .context_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    prepare_out_dir(&out_dir)?;
    let config =
        load_config(manifest.config_file.as_deref(), file.config.clone(), &manifest.overrides)?;
    let deps = build_deps(
        manifest.provider,
        manifest.script.as_deref(),
        manifest.fixtures_dir.as_deref(),
        manifest.prompts_dir.as_deref(),
        &out_dir,
    )?;
    let orchestrator = Orchestrator::new(config.clone(), deps)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_checkpoint(manifest.context_path.clone());
    let state = orchestrator
        .state_from_checkpoint(&file)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let output = orchestrator.drive(state);
    finish(output, config, &out_dir)
}

/// Render a stored context as a human-readable summary: topic, status, plan
/// versions with change blocks, per-search summaries, progress history.
pub fn cmd_inspect(context_path: &Path) -> Result<String, CliError> {
    let file = ContextFile::load(context_path).map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = &file.context;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    line(format!("Topic: {}", ctx.topic()));
    line(format!("Run id: {}", ctx.run_id()));
    match &file.status {
        RunStatus::InProgress { iterations_completed } => {
            line(format!("Status: in progress, {iterations_completed} iteration(s) completed"));
        }
        RunStatus::Terminal { reason, final_progress } => {
            line(format!(
                "Status: terminal ({}) at {final_progress}% judged progress",
                reason_label(*reason)
            ));
        }
    }
    if let Some(config) = &file.config {
        line(format!(
            "Config: threshold {}%, max {} iterations, {} candidates",
            config.progress_threshold,
            config.max_iterations,
            config.crossover.candidates.len()
        ));
    }

    let versions = ctx.plan_versions();
    line(format!("\nPlan versions: {}", versions.len()));
    if let Some(first) = versions.first() {
        line(format!("-- v{} ({})", first.plan.version(), first.reason));
        for rendered in render_plan(&first.plan).lines().skip(1) {
            line(format!("  {}", rendered.trim_start()));
        }
    }
    for pair in versions.windows(2) {
        line(format!("-- update to v{} ({})", pair[1].plan.version(), pair[1].reason));
        for change in plan_changes(&pair[0].plan, &pair[1].plan) {
            line(format!("  {change}"));
        }
    }

    let trajectories = ctx.trajectories();
    line(format!("\nTrajectories: {}", trajectories.len()));
    for t in trajectories {
        line(format!("  [{}] {}", t.seq_no, t.query.text));
        line(format!(
            "      answer ({} candidate(s), {} artifact(s)): {}",
            t.candidate_answers.len(),
            t.artifacts.len(),
            truncate(&t.synthesized_answer.text, 120)
        ));
        if t.low_confidence {
            line("      note: answered without supporting web evidence".to_string());
        }
    }

    let history: Vec<String> = ctx
        .progress_history()
        .iter()
        .map(|a| format!("{}%", a.percent))
        .collect();
    line(format!(
        "\nProgress history: {}",
        if history.is_empty() { "(none)".to_string() } else { history.join(" -> ") }
    ));
    Ok(out)
}

/// Stable snake_case label for a termination reason, matching its
/// serialized form.
pub fn reason_label(reason: TerminationReason) -> &'static str {
    match reason {
        TerminationReason::ThresholdReached => "threshold_reached",
        TerminationReason::MaxIterationsExhausted => "max_iterations_exhausted",
        TerminationReason::AbortedError => "aborted_error",
    }
}

fn truncate(text: &str, max_chars: usize) -> String {
    if text.chars().count() <= max_chars {
        return text.to_string();
    }
    let cut: String = text.chars().take(max_chars).collect();
    format!("{cut}…")
}

/// Human-readable differences between two consecutive plan versions.
fn plan_changes(old: &ResearchPlan, new: &ResearchPlan) -> Vec<String> {
    let mut changes = Vec::new();
    for step in new.steps() {
        match old.step(&step.id) {
            None => changes.push(format!("+ added ({}) {}", step.id, step.description)),
            Some(prev) => {
                if prev.status != step.status {
                    let verb = match step.status {
                        StepStatus::Done => "* completed",
                        StepStatus::Cancelled => "- cancelled",
                        StepStatus::Pending => "~ reopened",
                    };
                    changes.push(format!("{verb} ({}) {}", step.id, step.description));
                } else if step.status == StepStatus::Pending && prev.position != step.position {
                    changes.push(format!(
                        "~ moved ({}) {}: {} -> {}",
                        step.id, step.description, prev.position, step.position
                    ));
                }
            }
        }
    }
    if changes.is_empty() {
        changes.push("(no step changes)".to_string());
    }
    changes
}

fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"probe")
        .map_err(|e| CliError::Usage(format!("output directory {} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

/// Built-in defaults, overlaid by the config file when given (or the stored
/// config on resume), overlaid by flag-level overrides; then validated.
fn load_config(
    config_file: Option<&Path>,
    stored: Option<OrchestratorConfig>,
    overrides: &ConfigOverrides,
) -> Result<OrchestratorConfig, CliError> {
    let base = match config_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
            })?;
            toml::from_str(&text).map_err(|e| {
                CliError::Usage(format!("config file {} does not parse: {e}", path.display()))
            })?
        }
        None => stored.unwrap_or_default(),
    };
    let config = overrides.apply(base);
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn env_var(name: &str, purpose: &str) -> Result<String, CliError> {
    match std::env::var(name) {
        Ok(v) if !v.trim().is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!(
            "{name} is not set; {purpose} (credentials and endpoints are only read from the environment)"
        ))),
    }
}

fn live_gateway_provider() -> Result<HttpProvider, CliError> {
    let api_key = env_var(LLM_API_KEY_ENV, "the live LLM provider needs an API key")?;
    let base_url = env_var(LLM_BASE_URL_ENV, "the live LLM provider needs a base URL")?;
    let model = env_var(LLM_MODEL_ENV, "the live LLM provider needs a model name")?;
    HttpProvider::new(HttpProviderConfig::new(base_url, model, api_key))
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn fixture_backend(fixtures_dir: Option<&Path>) -> Result<FixtureStore, CliError> {
    let dir = fixtures_dir.ok_or_else(|| {
        CliError::Usage("this provider replays recorded searches; pass --fixtures-dir".into())
    })?;
    FixtureStore::load(dir).map_err(|e| CliError::Usage(e.to_string()))
}

/// Resolve the provider selection into orchestrator dependencies. Constructs
/// clients only; nothing here performs a network request.
fn build_deps(
    provider: ProviderSelection,
    script: Option<&Path>,
    fixtures_dir: Option<&Path>,
    prompts_dir: Option<&Path>,
    out_dir: &Path,
) -> Result<Deps, CliError> {
    let prompts = match prompts_dir {
        Some(dir) => PromptSet::from_dir(dir).map_err(|e| {
            CliError::Usage(format!("cannot load prompt templates from {}: {e}", dir.display()))
        })?,
        None => PromptSet::default(),
    };

    type Wiring = (Arc<dyn LlmProvider>, Box<dyn SearchBackend>, Arc<dyn Clock>);
    let (llm, search_backend, clock): Wiring =
        match provider {
            ProviderSelection::Scripted => {
                let path = script.ok_or_else(|| {
                    CliError::Usage("the scripted provider needs a transcript; pass --script".into())
                })?;
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read script {}: {e}", path.display()))
                })?;
                let script = Script::from_json(&text).map_err(|e| {
                    CliError::Usage(format!("script {} does not parse: {e}", path.display()))
                })?;
                (
                    Arc::new(ScriptedProvider::new(script)),
                    Box::new(fixture_backend(fixtures_dir)?),
                    Arc::new(FixedClock::epoch()),
                )
            }
            ProviderSelection::Fixtures => (
                Arc::new(live_gateway_provider()?),
                Box::new(fixture_backend(fixtures_dir)?),
                Arc::new(SystemClock),
            ),
            ProviderSelection::Live => {
                let llm = live_gateway_provider()?;
                let key = env_var(SEARCH_API_KEY_ENV, "live web search needs an API key")?;
                let mut config = TavilyConfig::new(key);
                if let Ok(url) = std::env::var(SEARCH_BASE_URL_ENV) {
                    if !url.trim().is_empty() {
                        config.base_url = url;
                    }
                }
                let backend =
                    TavilyBackend::new(config).map_err(|e| CliError::Usage(e.to_string()))?;
                (Arc::new(llm), Box::new(backend), Arc::new(SystemClock))
            }
        };

    let gateway = Gateway::new(llm)
        .with_log_file(&out_dir.join("llm_calls.jsonl"))
        .map_err(|e| CliError::Usage(format!("cannot open LLM call log: {e}")))?;
    Ok(Deps {
        gateway: Arc::new(gateway),
        search: Arc::new(SearchClient::new(search_backend)),
        prompts: Arc::new(prompts),
        clock,
    })
}

/// Persist all run artifacts and convert the outcome into an exit status:
/// `Ok` only when a report was produced without an abort.
fn finish(
    output: RunOutput,
    config: OrchestratorConfig,
    out_dir: &Path,
) -> Result<RunArtifacts, CliError> {
    let context_path = out_dir.join("context.json");
    let events_path = out_dir.join("events.jsonl");
    let llm_log_path = out_dir.join("llm_calls.jsonl");

    let status = match output.record.termination_reason {
        Some(reason) => {
            RunStatus::Terminal { reason, final_progress: output.record.final_progress }
        }
        None => RunStatus::InProgress { iterations_completed: output.record.iterations_completed },
    };
    ContextFile::new(status, Some(config), output.context.clone())
        .save(&context_path)
        .map_err(|e| CliError::Aborted(format!("run finished but context write failed: {e}")))?;

    let mut lines = String::new();
    for event in &output.record.events {
        lines.push_str(&serde_json::to_string(event).expect("event serializes"));
        lines.push('\n');
    }
    fs::write(&events_path, lines)
        .map_err(|e| CliError::Aborted(format!("run finished but event log write failed: {e}")))?;

    let report_path = match &output.report {
        Some(report) => {
            let path = out_dir.join("report.md");
            fs::write(&path, render_markdown(report)).map_err(|e| {
                CliError::Aborted(format!("run finished but report write failed: {e}"))
            })?;
            Some(path)
        }
        None => None,
    };

    match output.record.termination_reason {
        Some(TerminationReason::AbortedError) => Err(CliError::Aborted(
            output.record.failure.clone().unwrap_or_else(|| "unspecified failure".into()),
        )),
        _ if output.report.is_none() => Err(CliError::Aborted(
            output
                .record
                .failure
                .clone()
                .unwrap_or_else(|| "run finished without producing a report".into()),
        )),
        _ => Ok(RunArtifacts { output, context_path, events_path, report_path, llm_log_path }),
    }
}
