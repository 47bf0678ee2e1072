//! One-shot report generation: a single LLM pass over the final plan and the
//! whole research context.
//!
//! There is deliberately no draft-refinement loop here — the architecture's
//! bet is that a context built by sequential research is strong enough to
//! write from in one go. The writer gets every synthesized answer (the
//! context renderer never drops those), raw evidence as budget allows, and
//! instructions to keep fact density high and to write in the topic's
//! language.

use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::context::{render_context, GlobalResearchContext, RenderError};
use crate::gateway::{ChatRequest, DecodingParams, Gateway, GatewayError};
use crate::planner::{render_plan, ResearchPlan};
use crate::prompts::{render, PromptSet};

/// One cited source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub url: String,
    pub title: String,
}

/// The final research document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Section-structured markdown-style text.
    pub body: String,
    /// Every artifact URL cited by the research, deduplicated, in order of
    /// first appearance.
    pub sources: Vec<SourceRef>,
    pub topic: String,
    pub generated_at: DateTime<Utc>,
    /// True when the run aborted and this report covers only what was
    /// gathered before the failure.
    pub partial_flag: bool,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write a report from a context with no trajectories")]
    EmptyContext,
    #[error("report generation returned an empty body")]
    EmptyBody,
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

pub struct ReportWriter {
    gateway: Arc<Gateway>,
    prompts: Arc<PromptSet>,
    clock: Arc<dyn Clock>,
}

impl ReportWriter {
    pub fn new(gateway: Arc<Gateway>, prompts: Arc<PromptSet>, clock: Arc<dyn Clock>) -> Self {
        ReportWriter { gateway, prompts, clock }
    }

    /// Produce the report in exactly one generation call.
    ///
    /// The prompt carries the final plan and the rendered context; `budget`
    /// bounds the context rendering (synthesized answers always survive,
    /// raw artifact excerpts are dropped oldest-first if needed).
    pub fn generate_report(
        &self,
        plan: &ResearchPlan,
        ctx: &GlobalResearchContext,
        budget: usize,
    ) -> Result<Report, ReportError> {
        if ctx.trajectories().is_empty() {
            return Err(ReportError::EmptyContext);
        }
        let context_text = render_context(ctx, budget)?;
        let prompt = render(
            &self.prompts.report,
            &[
                ("topic", ctx.topic()),
                ("context", &context_text),
                ("plan", &render_plan(plan)),
            ],
        );
        let request = ChatRequest::new(
            "You are a research report writer.",
            prompt,
            DecodingParams::conservative(),
            8192,
            "report",
        )?;
        let response = self.gateway.complete(&request)?;
        if response.text.trim().is_empty() {
            return Err(ReportError::EmptyBody);
        }
        Ok(Report {
            body: response.text,
            sources: collect_sources(ctx),
            topic: ctx.topic().to_string(),
            generated_at: self.clock.now(),
            partial_flag: false,
        })
    }
}

/// All artifact sources across the run, deduplicated by URL, ordered by
/// first appearance (trajectory order, then result order).
fn collect_sources(ctx: &GlobalResearchContext) -> Vec<SourceRef> {
    let mut sources: Vec<SourceRef> = Vec::new();
    for t in ctx.trajectories() {
        for artifact in &t.artifacts {
            if !sources.iter().any(|s| s.url == artifact.url) {
                sources.push(SourceRef { url: artifact.url.clone(), title: artifact.title.clone() });
            }
        }
    }
    sources
}

/// Render a report to a standalone markdown document.
pub fn render_markdown(report: &Report) -> String {
    let mut out = String::new();
    if report.partial_flag {
        out.push_str("> **Note:** this run aborted before completion; the report covers only the research gathered up to the failure.\n\n");
    }
    out.push_str(&report.body);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str("\n## Sources\n");
    if report.sources.is_empty() {
        out.push_str("_No web sources passed the relevance filter during this run._\n");
    } else {
        for (i, s) in report.sources.iter().enumerate() {
            if s.title.is_empty() {
                out.push_str(&format!("{}. {}\n", i + 1, s.url));
            } else {
                out.push_str(&format!("{}. {} — {}\n", i + 1, s.title, s.url));
            }
        }
    }
    out.push_str(&format!("\n_Generated at {}._\n", report.generated_at.to_rfc3339()));
    out
}
