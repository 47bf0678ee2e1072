//! Deterministic, budget-bounded text rendering of the research context.
//!
//! The rendering feeds every downstream prompt (reflection, progress
//! judgment, report writing), so it must be a pure function of the context
//! and the budget. Content falls in two tiers:
//!
//! - **Mandatory** — topic, current plan, and each trajectory's query,
//!   synthesized answer, and source URLs. Never dropped; if the budget
//!   cannot hold this tier the call errors instead of truncating.
//! - **Droppable** — raw artifact excerpts. When the full rendering exceeds
//!   the budget these are dropped oldest-first until it fits.

use thiserror::Error;

use super::GlobalResearchContext;
use crate::planner::render_plan;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("context budget {budget} tokens is below the minimum {required} needed for the topic, plan, and synthesized answers")]
    BudgetTooSmall { budget: usize, required: usize },
}

/// Token estimate: one token per 4 characters, rounded up. Deterministic and
/// provider-neutral; callers size budgets against this, not a real tokenizer.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Smallest budget for which [`render_context`] succeeds on this context —
/// the estimate of the rendering with every artifact excerpt dropped.
pub fn min_render_budget(ctx: &GlobalResearchContext) -> usize {
    let all_dropped = ctx
        .trajectories()
        .iter()
        .map(|t| t.artifacts.len())
        .sum();
    estimate_tokens(&render_with_dropped(ctx, all_dropped))
}

/// Render the context to prompt text within `budget` estimated tokens.
///
/// Artifact excerpts are dropped oldest-first (across the whole run, not per
/// trajectory) until the estimate fits. Synthesized answers, queries, the
/// plan, and the topic are never dropped. Same `(ctx, budget)` always yields
/// byte-identical output.
pub fn render_context(ctx: &GlobalResearchContext, budget: usize) -> Result<String, RenderError> {
    let total_artifacts: usize = ctx.trajectories().iter().map(|t| t.artifacts.len()).sum();
    for dropped in 0..=total_artifacts {
        let rendered = render_with_dropped(ctx, dropped);
        if estimate_tokens(&rendered) <= budget {
            return Ok(rendered);
        }
    }
    Err(RenderError::BudgetTooSmall { budget, required: min_render_budget(ctx) })
}

/// Render with the `dropped` oldest artifact excerpts omitted (artifacts are
/// ordered by trajectory, then by their position within the trajectory).
fn render_with_dropped(ctx: &GlobalResearchContext, dropped: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Research Context\nTopic: {}\n", ctx.topic()));

    match ctx.current_plan() {
        Some(plan) => {
            out.push_str("\n## Current Plan\n");
            out.push_str(&render_plan(plan));
        }
        None => out.push_str("\n## Current Plan\n(no plan yet)\n"),
    }

    if ctx.trajectories().is_empty() {
        out.push_str("\n## Findings\n(no searches performed yet)\n");
        return out;
    }

    out.push_str("\n## Findings\n");
    // Global chronological index over (trajectory, artifact) pairs; the
    // first `dropped` indices are omitted.
    let mut artifact_index = 0usize;
    for t in ctx.trajectories() {
        out.push_str(&format!("\n### Search {}: {}\n", t.seq_no, t.query.text));
        out.push_str(&format!("Answer: {}\n", t.synthesized_answer.text));
        if t.synthesized_answer.source_urls.is_empty() {
            out.push_str("Sources: (none)\n");
        } else {
            out.push_str(&format!(
                "Sources: {}\n",
                t.synthesized_answer.source_urls.join(", ")
            ));
        }
        if t.low_confidence {
            out.push_str("Note: answered without supporting web evidence.\n");
        }
        for artifact in &t.artifacts {
            if artifact_index >= dropped {
                out.push_str(&format!(
                    "Evidence [{}] (score {:.2}): {}\n",
                    artifact.url, artifact.score, artifact.content
                ));
            }
            artifact_index += 1;
        }
    }
    out
}
