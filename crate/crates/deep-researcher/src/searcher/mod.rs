//! The search agent: context-aware query generation and the candidate
//! crossover answering algorithm.
//!
//! For each query, `n` candidate agents (default 3) answer the same prompt
//! over the same filtered web artifacts, each sampling under its own
//! (temperature, top_k) pair so the group attends to different parts of the
//! search space. One merge call then consolidates the candidate answers into
//! a single synthesized answer, keeping every fact and number. There is no
//! revision loop and no auto-rating of candidates — merge everything, pick
//! nothing.

use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::context::{render_context, GlobalResearchContext, RenderError, Trajectory};
use crate::gateway::{
    ChatRequest, DecodingParams, Gateway, GatewayError, StructuredOutput,
};
use crate::planner::ResearchPlan;
use crate::prompts::{render, PromptSet};
use crate::search::{
    filter_by_score, RawSearchResult, SearchClient, SearchConfig, SearchError, SearchQuery,
};

/// One candidate agent's sampling setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateConfig {
    pub candidate_id: u32,
    pub decoding: DecodingParams,
}

/// Crossover setup: the candidate roster and how the merge call decodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossoverConfig {
    pub candidates: Vec<CandidateConfig>,
    /// Decoding for the merge call — low temperature by default, because
    /// synthesis should be faithful, not creative.
    pub merge_decoding: DecodingParams,
    /// Per-artifact excerpt cap (characters) in candidate prompts, bounding
    /// prompt size across many long pages.
    pub artifact_excerpt_cap: usize,
    /// Run candidate calls on separate threads. Off by default; scripted
    /// sequential runs must stay serialized for determinism.
    pub parallel_candidates: bool,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self::with_candidate_count(3)
    }
}

impl CrossoverConfig {
    /// Roster of `n` candidates spanning conservative-to-exploratory
    /// decoding: (0.2, 20), (0.7, 40), (1.0, 64), then further top_k steps
    /// at temperature 1.0 for n > 3. All pairs are pairwise distinct.
    pub fn with_candidate_count(n: usize) -> Self {
        let base = [(0.2, 20), (0.7, 40), (1.0, 64)];
        let candidates = (0..n)
            .map(|i| {
                let (temperature, top_k) = if i < base.len() {
                    base[i]
                } else {
                    (1.0, 64 + 16 * (i as u32 - 2))
                };
                CandidateConfig {
                    candidate_id: i as u32 + 1,
                    decoding: DecodingParams::new(temperature, top_k)
                        .expect("schedule params are in range"),
                }
            })
            .collect();
        CrossoverConfig {
            candidates,
            merge_decoding: DecodingParams::conservative(),
            artifact_excerpt_cap: 2000,
            parallel_candidates: false,
        }
    }

    pub fn validate(&self) -> Result<(), SearcherError> {
        if self.candidates.is_empty() {
            return Err(SearcherError::InvalidConfig("at least one candidate required".into()));
        }
        for (i, a) in self.candidates.iter().enumerate() {
            for b in &self.candidates[i + 1..] {
                if a.candidate_id == b.candidate_id {
                    return Err(SearcherError::InvalidConfig(format!(
                        "duplicate candidate_id {}",
                        a.candidate_id
                    )));
                }
                if a.decoding == b.decoding {
                    return Err(SearcherError::InvalidConfig(format!(
                        "candidates {} and {} share (temperature, top_k) = ({}, {}); pairs must be pairwise distinct",
                        a.candidate_id,
                        b.candidate_id,
                        a.decoding.temperature(),
                        a.decoding.top_k()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One candidate's answer to the query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateAnswer {
    pub candidate_id: u32,
    pub text: String,
}

/// The merged answer recorded in the trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesizedAnswer {
    pub text: String,
    /// URLs of the artifacts the candidates worked from (deduplicated,
    /// first-seen order).
    pub source_urls: Vec<String>,
    pub contributing_candidates: Vec<u32>,
    /// True when the merge call failed and the synthesis fell back to
    /// labeled concatenation of the candidate answers.
    #[serde(default)]
    pub merge_fallback: bool,
}

/// Wire shape of the query-generation call.
#[derive(Debug, Deserialize)]
pub struct SearchQueryDraft {
    pub query: String,
    #[serde(default)]
    pub rationale: String,
    #[serde(default)]
    pub plan_step_ref: Option<String>,
}

impl StructuredOutput for SearchQueryDraft {
    const SCHEMA_ID: &'static str = "search-query";

    fn validate(&self) -> Result<(), String> {
        if self.query.trim().is_empty() {
            return Err("query must be non-empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SearcherError {
    #[error("invalid crossover config: {0}")]
    InvalidConfig(String),
    #[error("plan has no pending steps to research")]
    NoPendingSteps,
    #[error("query generation kept producing already-searched queries after {attempts} attempt(s)")]
    DedupExhausted { attempts: u32 },
    #[error("query generation failed: {0}")]
    QueryGeneration(#[source] GatewayError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("web search for `{query}` failed: {source}")]
    Search {
        query: String,
        #[source]
        source: SearchError,
    },
    #[error("all {count} candidates failed; last error: {last_error}")]
    AllCandidatesFailed { count: usize, last_error: String },
}

/// The search agent. Owns no loop state; every operation takes the plan and
/// context it should condition on.
pub struct Searcher {
    gateway: Arc<Gateway>,
    client: Arc<SearchClient>,
    prompts: Arc<PromptSet>,
    clock: Arc<dyn Clock>,
    max_repair_attempts: u32,
}

impl Searcher {
    pub fn new(
        gateway: Arc<Gateway>,
        client: Arc<SearchClient>,
        prompts: Arc<PromptSet>,
        clock: Arc<dyn Clock>,
        max_repair_attempts: u32,
    ) -> Self {
        Searcher { gateway, client, prompts, clock, max_repair_attempts }
    }

    /// Generate the next search query from the plan and everything already
    /// researched.
    ///
    /// A hard dedup guard backs the prompt-level instruction: if the model
    /// proposes a query whose normalized text already exists in the context,
    /// it is re-prompted with an "already searched" notice, up to
    /// `dedup_retry_limit` extra attempts. Each attempt shows up in the
    /// gateway run log under the `search-query` tag.
    pub fn generate_query(
        &self,
        plan: &ResearchPlan,
        ctx: &GlobalResearchContext,
        context_budget: usize,
        dedup_retry_limit: u32,
    ) -> Result<SearchQuery, SearcherError> {
        if !plan.has_pending_steps() {
            return Err(SearcherError::NoPendingSteps);
        }
        let context_text = render_context(ctx, context_budget)?;
        let base_prompt = render(
            &self.prompts.search_query,
            &[("context", &context_text), ("plan", &crate::planner::render_plan(plan))],
        );

        let mut rejected: Vec<String> = Vec::new();
        for attempt in 0..=dedup_retry_limit {
            let prompt = if rejected.is_empty() {
                base_prompt.clone()
            } else {
                format!(
                    "{base_prompt}\n\nThese queries were ALREADY SEARCHED and must not be proposed again:\n{}",
                    rejected.iter().map(|q| format!("- {q}\n")).collect::<String>()
                )
            };
            let request = ChatRequest::new(
                "You are a research search agent.",
                prompt,
                DecodingParams::conservative(),
                512,
                "search-query",
            )
            .map_err(SearcherError::QueryGeneration)?;
            let draft: SearchQueryDraft = self
                .gateway
                .complete_structured(&request, self.max_repair_attempts)
                .map_err(SearcherError::QueryGeneration)?;

            if ctx.has_query(&draft.query) {
                log::info!(
                    "dedup guard rejected query `{}` (attempt {} of {})",
                    draft.query,
                    attempt + 1,
                    dedup_retry_limit + 1
                );
                rejected.push(draft.query);
                continue;
            }
            // Only accept plan references that actually resolve.
            let plan_step_ref = draft
                .plan_step_ref
                .filter(|id| plan.step(id).is_some());
            return Ok(SearchQuery {
                text: draft.query,
                rationale: draft.rationale,
                plan_step_ref,
                seq_no: ctx.next_seq_no(),
            });
        }
        Err(SearcherError::DedupExhausted { attempts: dedup_retry_limit + 1 })
    }

    /// Ask every configured candidate to answer the query over the shared
    /// artifacts. Issues exactly `|cfg.candidates|` LLM calls, each with its
    /// own decoding parameters and an identical prompt. A failed candidate
    /// is omitted (and logged); only total failure is an error. Answers come
    /// back ordered by candidate_id.
    pub fn answer_with_candidates(
        &self,
        query: &SearchQuery,
        artifacts: &[RawSearchResult],
        cfg: &CrossoverConfig,
    ) -> Result<Vec<CandidateAnswer>, SearcherError> {
        cfg.validate()?;
        let prompt = render(
            &self.prompts.candidate,
            &[
                ("query", &query.text),
                ("artifacts", &render_artifacts(artifacts, cfg.artifact_excerpt_cap)),
            ],
        );

        let call = |candidate: &CandidateConfig| -> Result<CandidateAnswer, GatewayError> {
            let request = ChatRequest::new(
                "You are a research candidate agent.",
                prompt.clone(),
                candidate.decoding,
                2048,
                format!("candidate-{}", candidate.candidate_id),
            )?;
            let response = self.gateway.complete(&request)?;
            Ok(CandidateAnswer { candidate_id: candidate.candidate_id, text: response.text })
        };

        let outcomes: Vec<(u32, Result<CandidateAnswer, GatewayError>)> =
            if cfg.parallel_candidates {
                thread::scope(|scope| {
                    let handles: Vec<_> = cfg
                        .candidates
                        .iter()
                        .map(|c| (c.candidate_id, scope.spawn(move || call(c))))
                        .collect();
                    handles
                        .into_iter()
                        .map(|(id, h)| (id, h.join().expect("candidate thread panicked")))
                        .collect()
                })
            } else {
                cfg.candidates.iter().map(|c| (c.candidate_id, call(c))).collect()
            };

        let mut answers = Vec::new();
        let mut last_error = String::new();
        for (candidate_id, outcome) in outcomes {
            match outcome {
                Ok(answer) if !answer.text.trim().is_empty() => answers.push(answer),
                Ok(_) => {
                    log::warn!("candidate {candidate_id} returned an empty answer; omitted");
                    last_error = format!("candidate {candidate_id} returned an empty answer");
                }
                Err(err) => {
                    log::warn!("candidate {candidate_id} failed and is omitted: {err}");
                    last_error = err.to_string();
                }
            }
        }
        if answers.is_empty() {
            return Err(SearcherError::AllCandidatesFailed {
                count: cfg.candidates.len(),
                last_error,
            });
        }
        answers.sort_by_key(|a| a.candidate_id);
        Ok(answers)
    }

    /// Merge candidate answers into one synthesized answer.
    ///
    /// A single answer passes through verbatim with no LLM call. Multiple
    /// answers go through one merge call; if that call fails, the fallback
    /// synthesis is the labeled concatenation of all answers — degraded but
    /// non-lossy — and the result is flagged.
    pub fn crossover_merge(
        &self,
        query: &SearchQuery,
        answers: &[CandidateAnswer],
        artifacts: &[RawSearchResult],
        cfg: &CrossoverConfig,
    ) -> SynthesizedAnswer {
        assert!(!answers.is_empty(), "crossover_merge requires at least one answer");
        let source_urls = dedup_urls(artifacts);
        let contributing_candidates: Vec<u32> =
            answers.iter().map(|a| a.candidate_id).collect();

        if answers.len() == 1 {
            return SynthesizedAnswer {
                text: answers[0].text.clone(),
                source_urls,
                contributing_candidates,
                merge_fallback: false,
            };
        }

        let labeled = labeled_answers(answers);
        let prompt =
            render(&self.prompts.merge, &[("query", &query.text), ("answers", &labeled)]);
        let merge_call = || -> Result<String, GatewayError> {
            let request = ChatRequest::new(
                "You merge candidate research answers without losing facts.",
                prompt.clone(),
                cfg.merge_decoding,
                4096,
                "merge",
            )?;
            Ok(self.gateway.complete(&request)?.text)
        };
        match merge_call() {
            Ok(text) => SynthesizedAnswer {
                text,
                source_urls,
                contributing_candidates,
                merge_fallback: false,
            },
            Err(err) => {
                log::warn!("merge call failed; falling back to labeled concatenation: {err}");
                SynthesizedAnswer {
                    text: labeled,
                    source_urls,
                    contributing_candidates,
                    merge_fallback: true,
                }
            }
        }
    }

    /// Answer an already-generated query: search, filter by relevance, fan
    /// out candidates, merge. Returns a complete trajectory or an error,
    /// never a partial record. Never writes to the context — appends belong
    /// to the orchestrator.
    pub fn answer_query(
        &self,
        query: SearchQuery,
        search_cfg: &SearchConfig,
        crossover_cfg: &CrossoverConfig,
    ) -> Result<Trajectory, SearcherError> {
        let capped = self
            .client
            .search(&query, search_cfg)
            .map_err(|source| SearcherError::Search { query: query.text.clone(), source })?;
        let artifacts = filter_by_score(&capped, search_cfg.score_threshold);
        let low_confidence = artifacts.is_empty();
        if low_confidence {
            log::info!(
                "query `{}` has no artifacts above score {}; candidates answer unsupported",
                query.text,
                search_cfg.score_threshold
            );
        }
        let candidate_answers = self.answer_with_candidates(&query, &artifacts, crossover_cfg)?;
        let synthesized_answer =
            self.crossover_merge(&query, &candidate_answers, &artifacts, crossover_cfg);
        Ok(Trajectory {
            seq_no: query.seq_no,
            query,
            artifacts,
            candidate_answers,
            synthesized_answer,
            low_confidence,
            created_at: self.clock.now(),
        })
    }

    /// One full research iteration's answering work: [`Self::generate_query`]
    /// composed with [`Self::answer_query`].
    pub fn research_step(
        &self,
        plan: &ResearchPlan,
        ctx: &GlobalResearchContext,
        search_cfg: &SearchConfig,
        crossover_cfg: &CrossoverConfig,
        context_budget: usize,
        dedup_retry_limit: u32,
    ) -> Result<Trajectory, SearcherError> {
        let query = self.generate_query(plan, ctx, context_budget, dedup_retry_limit)?;
        self.answer_query(query, search_cfg, crossover_cfg)
    }
}

/// Deterministic artifact block for candidate prompts, excerpts capped
/// per-result.
fn render_artifacts(artifacts: &[RawSearchResult], excerpt_cap: usize) -> String {
    if artifacts.is_empty() {
        return "No web artifacts are available for this query. Answer from the query alone \
                and state clearly that the answer lacks supporting evidence."
            .to_string();
    }
    let mut out = String::from("Web artifacts:\n");
    for (i, artifact) in artifacts.iter().enumerate() {
        let excerpt: String = artifact.content.chars().take(excerpt_cap).collect();
        out.push_str(&format!(
            "[{}] {} — {} (score {:.2})\n{}\n",
            i + 1,
            artifact.title,
            artifact.url,
            artifact.score,
            excerpt
        ));
    }
    out
}

fn labeled_answers(answers: &[CandidateAnswer]) -> String {
    answers
        .iter()
        .map(|a| format!("Candidate {}:\n{}\n", a.candidate_id, a.text))
        .collect::<Vec<_>>()
        .join("\n")
}

fn dedup_urls(artifacts: &[RawSearchResult]) -> Vec<String> {
    let mut seen = Vec::new();
    for a in artifacts {
        if !seen.contains(&a.url) {
            seen.push(a.url.clone());
        }
    }
    seen
}
