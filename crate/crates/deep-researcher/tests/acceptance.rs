//! Acceptance suite: one test per engine-level guarantee, each fully
//! deterministic (seeded randomness, scripted providers, in-memory search).
//!
//! Every test is an end-to-end check of one documented behavior:
//!
//!  1. event logs always match `Plan (Query Answer Reflect Update Assess)+ Report`
//!  2. threshold halting is exact and inclusive
//!  3. the iteration cap halts a stuck judge and still produces a report
//!  4. every research step issues exactly 3 candidate calls with pairwise-distinct decoding
//!  5. an echoing merge pass retains every candidate's planted fact
//!  6. search output equals an independent top-5-then-threshold reference filter
//!  7. query generation never returns an already-searched query
//!  8. plan edits match a brute-force list-model oracle
//!  9. contexts survive save/load and interrupt/resume byte-for-byte
//! 10. report generation is a single LLM call whose prompt keeps every answer
//! 11. the monolithic driver and single-step driver produce identical logs

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use chrono::{TimeZone, Utc};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use regex::Regex;

use deep_researcher::clock::FixedClock;
use deep_researcher::context::{
    estimate_tokens, min_render_budget, normalize_query, render_context, ContextFile,
    GlobalResearchContext, RunStatus, Trajectory,
};
use deep_researcher::gateway::{
    Gateway, RecordingProvider, Script, ScriptEntry, ScriptMode, ScriptedProvider,
};
use deep_researcher::orchestrator::{
    Deps, Orchestrator, OrchestratorConfig, TerminationReason,
};
use deep_researcher::planner::{
    apply_edits, PlanEdit, ProgressAssessment, ReflectionDecision, ResearchPlan, StepStatus,
};
use deep_researcher::prompts::PromptSet;
use deep_researcher::report::ReportWriter;
use deep_researcher::search::{
    filter_by_score, result, InMemoryBackend, RawSearchResult, SearchClient, SearchConfig,
    SearchQuery,
};
use deep_researcher::searcher::{
    CandidateAnswer, CrossoverConfig, Searcher, SearcherError, SynthesizedAnswer,
};

// ---------------------------------------------------------------------------
// Shared scripted-run harness
// ---------------------------------------------------------------------------

fn default_results() -> Vec<RawSearchResult> {
    vec![
        result("https://a.example/1", "One", "first finding", 0.95),
        result("https://a.example/2", "Two", "second finding", 0.60),
        result("https://a.example/3", "Three", "third finding", 0.31),
        result("https://a.example/4", "Four", "weak finding", 0.18),
    ]
}

fn draft_json(query: &str) -> String {
    format!(r#"{{"query": "{query}", "rationale": "next gap", "plan_step_ref": null}}"#)
}

/// Script entries for one loop iteration: query draft, three candidates,
/// merge, no-op reflection, progress judgment.
fn iteration_entries(query: &str, percent: f64) -> Vec<ScriptEntry> {
    let mut script = Script::sequential()
        .text("search-query", &draft_json(query))
        .text("candidate-1", &format!("first reading of {query}"))
        .text("candidate-2", &format!("second reading of {query}"))
        .text("candidate-3", &format!("third reading of {query}"))
        .text("merge", &format!("merged understanding of {query}"));
    script = script
        .text("reflection", r#"{"update_needed": false, "rationale": "plan holds", "edits": []}"#)
        .text(
            "progress",
            &format!(r#"{{"percent": {percent}, "rationale": "judged", "unexplored_areas": []}}"#),
        );
    script.build().entries
}

/// Full-run script: one plan, one iteration per judged percent, one report.
fn full_run_script(queries: &[String], percents: &[f64]) -> Script {
    assert_eq!(queries.len(), percents.len());
    let mut entries = Script::sequential()
        .text("plan", r#"{"steps": ["map the field", "collect evidence", "weigh trade-offs"]}"#)
        .build()
        .entries;
    for (query, percent) in queries.iter().zip(percents) {
        entries.extend(iteration_entries(query, *percent));
    }
    entries.extend(Script::sequential().text("report", "# Findings\nbody").build().entries);
    Script { mode: ScriptMode::Sequential, entries }
}

fn deps_for(provider: Arc<ScriptedProvider>) -> Deps {
    Deps {
        gateway: Arc::new(Gateway::new(provider)),
        search: Arc::new(SearchClient::new(Box::new(InMemoryBackend::with_default(
            default_results(),
        )))),
        prompts: Arc::new(PromptSet::default()),
        clock: Arc::new(FixedClock::epoch()),
    }
}

fn scripted_orchestrator(script: Script, config: OrchestratorConfig) -> Orchestrator {
    Orchestrator::new(config, deps_for(Arc::new(ScriptedProvider::new(script)))).unwrap()
}

fn scripted_searcher(script: Script) -> Searcher {
    Searcher::new(
        Arc::new(Gateway::new(Arc::new(ScriptedProvider::new(script)))),
        Arc::new(SearchClient::new(Box::new(InMemoryBackend::with_default(default_results())))),
        Arc::new(PromptSet::default()),
        Arc::new(FixedClock::epoch()),
        2,
    )
}

/// A minimal but fully-populated trajectory for context construction.
fn sample_trajectory(seq_no: u64, query_text: &str, answer: &str) -> Trajectory {
    Trajectory {
        seq_no,
        query: SearchQuery::new(query_text, seq_no),
        artifacts: vec![result(
            &format!("https://src.example/{seq_no}"),
            "Source",
            "supporting content",
            0.8,
        )],
        candidate_answers: vec![
            CandidateAnswer { candidate_id: 1, text: format!("candidate view: {answer}") },
            CandidateAnswer { candidate_id: 2, text: format!("other view: {answer}") },
        ],
        synthesized_answer: SynthesizedAnswer {
            text: answer.to_string(),
            source_urls: vec![format!("https://src.example/{seq_no}")],
            contributing_candidates: vec![1, 2],
            merge_fallback: false,
        },
        low_confidence: false,
        created_at: Utc.timestamp_opt(1_700_000_000 + seq_no as i64, 0).unwrap(),
    }
}

/// Random full-run setup shared by the conformance and driver-equivalence
/// criteria: 1–6 iterations, sometimes ending at the threshold and sometimes
/// at the iteration cap.
fn random_run_setup(
    case: usize,
    rng: &mut StdRng,
) -> (Script, OrchestratorConfig, String) {
    let iterations = rng.gen_range(1..=6usize);
    let stuck = rng.gen_bool(0.25);
    let mut percents: Vec<f64> =
        (0..iterations).map(|_| (rng.gen_range(0.0..89.0f64) * 10.0).round() / 10.0).collect();
    let mut config = OrchestratorConfig::default();
    if stuck {
        config.max_iterations = iterations as u64;
    } else {
        percents[iterations - 1] = (rng.gen_range(90.0..=100.0f64) * 10.0).round() / 10.0;
    }
    let queries: Vec<String> =
        (0..iterations).map(|i| format!("case {case} angle {i}")).collect();
    (full_run_script(&queries, &percents), config, format!("random topic {case}"))
}

// ---------------------------------------------------------------------------
// 1. State-machine conformance
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_event_logs_match_loop_grammar_on_randomized_runs() {
    let started = Instant::now();
    let grammar = Regex::new(r"^P(QARUS)+T$").unwrap();
    let mut rng = StdRng::seed_from_u64(0xACC1);

    for case in 0..24 {
        let (script, config, topic) = random_run_setup(case, &mut rng);
        let out = scripted_orchestrator(script, config).run(&topic);
        let transitions = out.record.transition_string();
        assert!(
            grammar.is_match(&transitions),
            "case {case}: event log `{transitions}` violates Plan (Query Answer Reflect Update Assess)+ Report"
        );
        assert!(
            matches!(
                out.record.termination_reason,
                Some(TerminationReason::ThresholdReached)
                    | Some(TerminationReason::MaxIterationsExhausted)
            ),
            "case {case}: unexpected termination {:?}",
            out.record.termination_reason
        );
        assert!(out.report.is_some(), "case {case}: no report");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "24 scripted runs took {elapsed:?}, budget is 5s");
}

// ---------------------------------------------------------------------------
// 2. Threshold halting
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_threshold_halting_is_exact_and_inclusive() {
    let queries = |n: usize| (0..n).map(|i| format!("q{i}")).collect::<Vec<_>>();

    // Judge sequence [30, 60, 92] with threshold 90: exactly 3 iterations.
    let out = scripted_orchestrator(
        full_run_script(&queries(3), &[30.0, 60.0, 92.0]),
        OrchestratorConfig::default(),
    )
    .run("threshold demo");
    assert_eq!(out.record.iterations_completed, 3);
    assert_eq!(out.record.termination_reason, Some(TerminationReason::ThresholdReached));
    assert_eq!(out.context.trajectories().len(), 3);

    // 89.9 is below the threshold: the loop runs another iteration.
    let out = scripted_orchestrator(
        full_run_script(&queries(2), &[89.9, 96.0]),
        OrchestratorConfig::default(),
    )
    .run("threshold demo");
    assert_eq!(out.record.iterations_completed, 2, "89.9 must not halt at threshold 90");

    // Exactly 90.0 halts: the comparison is inclusive.
    let out = scripted_orchestrator(
        full_run_script(&queries(1), &[90.0]),
        OrchestratorConfig::default(),
    )
    .run("threshold demo");
    assert_eq!(out.record.iterations_completed, 1, "90.0 must halt at threshold 90");
    assert_eq!(out.record.termination_reason, Some(TerminationReason::ThresholdReached));
}

// ---------------------------------------------------------------------------
// 3. Retry-cap halting
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_iteration_cap_halts_stuck_judge_with_report() {
    let queries: Vec<String> = (0..4).map(|i| format!("stuck angle {i}")).collect();
    let config = OrchestratorConfig { max_iterations: 4, ..OrchestratorConfig::default() };
    let out = scripted_orchestrator(
        full_run_script(&queries, &[50.0, 50.0, 50.0, 50.0]),
        config,
    )
    .run("stuck judge demo");

    assert_eq!(out.context.trajectories().len(), 4, "exactly 4 trajectories");
    assert_eq!(out.record.iterations_completed, 4);
    assert_eq!(
        out.record.termination_reason,
        Some(TerminationReason::MaxIterationsExhausted)
    );
    let report = out.report.expect("cap exhaustion still produces a report");
    assert!(!report.partial_flag);
}

// ---------------------------------------------------------------------------
// 4. Crossover cardinality and decoding diversity
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_each_step_issues_three_distinct_candidate_calls() {
    let queries: Vec<String> = (0..3).map(|i| format!("diverse angle {i}")).collect();
    let script = full_run_script(&queries, &[20.0, 55.0, 93.0]);
    let recorder = RecordingProvider::new(Arc::new(ScriptedProvider::new(script)));
    let deps = Deps {
        gateway: Arc::new(Gateway::new(recorder.clone())),
        search: Arc::new(SearchClient::new(Box::new(InMemoryBackend::with_default(
            default_results(),
        )))),
        prompts: Arc::new(PromptSet::default()),
        clock: Arc::new(FixedClock::epoch()),
    };
    let out = Orchestrator::new(OrchestratorConfig::default(), deps).unwrap().run("diversity");
    assert_eq!(out.context.trajectories().len(), 3);

    let candidate_requests: Vec<_> = recorder
        .requests()
        .into_iter()
        .filter(|r| r.request_tag.starts_with("candidate-"))
        .collect();
    assert_eq!(candidate_requests.len(), 9, "3 research steps x exactly 3 candidate calls");

    for (step, chunk) in candidate_requests.chunks(3).enumerate() {
        let pairs: HashSet<(u64, u32)> = chunk
            .iter()
            .map(|r| (r.decoding.temperature().to_bits(), r.decoding.top_k()))
            .collect();
        assert_eq!(pairs.len(), 3, "step {step}: decoding pairs must be pairwise distinct");

        let expected: HashSet<(u64, u32)> = [(0.2f64, 20u32), (0.7, 40), (1.0, 64)]
            .into_iter()
            .map(|(t, k)| (t.to_bits(), k))
            .collect();
        assert_eq!(pairs, expected, "step {step}: default decoding ladder");

        let prompts: HashSet<&str> = chunk.iter().map(|r| r.user_prompt.as_str()).collect();
        assert_eq!(prompts.len(), 1, "step {step}: candidates must share one prompt");
    }
}

// ---------------------------------------------------------------------------
// 5. Fact retention through crossover
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_crossover_retains_every_planted_fact() {
    let mut rng = StdRng::seed_from_u64(0xACC5);

    for trial in 0..50 {
        let sentinels: Vec<String> =
            (0..3).map(|k| format!("FACT-{trial}-{k}-{:08x}", rng.gen::<u32>())).collect();
        let script = Script::keyed()
            .text("candidate-1", &format!("one source says {}", sentinels[0]))
            .text("candidate-2", &format!("another angle gives {}", sentinels[1]))
            .text("candidate-3", &format!("a third estimate is {}", sentinels[2]))
            .echo("merge")
            .build();
        let searcher = scripted_searcher(script);

        let query = SearchQuery::new(format!("trial {trial}"), 1);
        let artifact_count = rng.gen_range(0..=3);
        let artifacts: Vec<RawSearchResult> = (0..artifact_count)
            .map(|i| result(&format!("https://t{trial}.example/{i}"), "T", "content", 0.5))
            .collect();

        let cfg = CrossoverConfig::default();
        let answers = searcher.answer_with_candidates(&query, &artifacts, &cfg).unwrap();
        assert_eq!(answers.len(), 3);
        let merged = searcher.crossover_merge(&query, &answers, &artifacts, &cfg);

        for sentinel in &sentinels {
            assert!(
                merged.text.contains(sentinel),
                "trial {trial}: synthesized answer dropped fact {sentinel}"
            );
        }
        assert!(!merged.merge_fallback, "trial {trial}: echo merge must not fall back");
        assert_eq!(merged.contributing_candidates, vec![1, 2, 3]);
    }
}

// ---------------------------------------------------------------------------
// 6. Search filtering against a brute-force reference
// ---------------------------------------------------------------------------

/// Independent reference: repeated max-scan (earliest index wins ties) picks
/// the top five, then a score cut at 0.30 keeps survivors in picked order.
fn reference_filter(results: &[RawSearchResult], cap: usize, threshold: f64) -> Vec<String> {
    let mut remaining: Vec<usize> = (0..results.len()).collect();
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < cap && !remaining.is_empty() {
        let mut best = 0;
        for j in 1..remaining.len() {
            if results[remaining[j]].score > results[remaining[best]].score {
                best = j;
            }
        }
        picked.push(remaining.remove(best));
    }
    picked
        .into_iter()
        .filter(|&i| results[i].score >= threshold)
        .map(|i| results[i].url.clone())
        .collect()
}

#[test]
fn criterion_06_search_output_equals_reference_over_random_sets() {
    let mut rng = StdRng::seed_from_u64(0xACC6);
    let config = SearchConfig::default();
    assert_eq!(config.max_results, 5);
    assert_eq!(config.score_threshold, 0.30);

    for case in 0..1000 {
        let count = rng.gen_range(0..=12);
        let results: Vec<RawSearchResult> = (0..count)
            .map(|i| {
                // Half the scores snap to a coarse grid so ties are common.
                let score = if rng.gen_bool(0.5) {
                    (rng.gen_range(0..=10) as f64) / 10.0
                } else {
                    rng.gen_range(0.0..=1.0)
                };
                result(
                    &format!("https://case{case}.example/r{i}"),
                    &format!("Result {i}"),
                    "body",
                    score,
                )
            })
            .collect();

        let client = SearchClient::new(Box::new(InMemoryBackend::with_default(results.clone())));
        let query = SearchQuery::new(format!("case {case}"), 1);
        let capped = client.search(&query, &config).unwrap();
        let kept = filter_by_score(&capped, config.score_threshold);
        let got: Vec<String> = kept.iter().map(|r| r.url.clone()).collect();

        let expected = reference_filter(&results, config.max_results, config.score_threshold);
        assert_eq!(got, expected, "case {case}: filter disagrees with reference");
    }
}

// ---------------------------------------------------------------------------
// 7. Dedup guard on query generation
// ---------------------------------------------------------------------------

/// A query text that normalizes to the same string as `query`.
fn normalized_variant(query: &str, rng: &mut StdRng) -> String {
    match rng.gen_range(0..3) {
        0 => query.to_uppercase(),
        1 => format!("  {}  ", query.replace(' ', "   ")),
        _ => {
            let mut chars: Vec<String> = query
                .split(' ')
                .map(|w| {
                    let mut w = w.to_string();
                    if rng.gen_bool(0.5) {
                        w = w.to_uppercase();
                    }
                    w
                })
                .collect();
            chars.insert(0, String::new()); // leading whitespace
            chars.join(" ")
        }
    }
}

#[test]
fn criterion_07_generated_queries_are_never_duplicates() {
    let mut rng = StdRng::seed_from_u64(0xACC7);
    let plan = ResearchPlan::from_steps(
        "dedup demo",
        vec!["step one".into(), "step two".into()],
    )
    .unwrap();

    for trial in 0..200 {
        let stored: Vec<String> =
            (0..rng.gen_range(1..=4)).map(|i| format!("stored query {trial} {i}")).collect();
        let mut ctx = GlobalResearchContext::new(format!("topic {trial}"), "run-dedup");
        for (i, q) in stored.iter().enumerate() {
            ctx.append_trajectory(sample_trajectory(i as u64 + 1, q, "answer")).unwrap();
        }

        let limit: u32 = rng.gen_range(0..=3);
        let forced = rng.gen_bool(0.35);
        let mut script = Script::sequential();
        if forced {
            // Every allowed attempt proposes an already-searched query.
            for _ in 0..=limit {
                let dup = normalized_variant(&stored[rng.gen_range(0..stored.len())], &mut rng);
                script = script.text("search-query", &draft_json(&dup));
            }
        } else {
            for _ in 0..rng.gen_range(0..=limit) {
                let dup = normalized_variant(&stored[rng.gen_range(0..stored.len())], &mut rng);
                script = script.text("search-query", &draft_json(&dup));
            }
            script = script.text("search-query", &draft_json(&format!("fresh angle {trial}")));
        }

        let searcher = scripted_searcher(script.build());
        match searcher.generate_query(&plan, &ctx, 1_000_000, limit) {
            Ok(query) => {
                assert!(!forced, "trial {trial}: forced-duplicate script must not yield a query");
                let normalized = normalize_query(&query.text);
                assert!(
                    !stored.iter().any(|s| normalize_query(s) == normalized),
                    "trial {trial}: returned an already-searched query `{}`",
                    query.text
                );
                assert_eq!(query.seq_no, ctx.next_seq_no());
            }
            Err(SearcherError::DedupExhausted { attempts }) => {
                assert!(forced, "trial {trial}: unexpected exhaustion");
                assert_eq!(attempts, limit + 1, "trial {trial}: one initial try plus {limit} retries");
            }
            Err(other) => panic!("trial {trial}: unexpected error {other}"),
        }
    }
}

// ---------------------------------------------------------------------------
// 8. Plan-edit algebra against a list-model oracle
// ---------------------------------------------------------------------------

/// Brute-force model of a plan: an ordered active list plus a cancelled pile.
#[derive(Clone, Debug, PartialEq)]
struct ModelStep {
    id: String,
    description: String,
    done: bool,
}

#[derive(Clone, Debug, PartialEq)]
struct ModelPlan {
    active: Vec<ModelStep>,
    cancelled: Vec<ModelStep>,
    next_id: u64,
}

impl ModelPlan {
    fn from_plan(plan: &ResearchPlan) -> Self {
        let active = plan
            .active_steps()
            .iter()
            .map(|s| ModelStep {
                id: s.id.clone(),
                description: s.description.clone(),
                done: s.status == StepStatus::Done,
            })
            .collect();
        let cancelled = plan
            .steps()
            .iter()
            .filter(|s| s.status == StepStatus::Cancelled)
            .map(|s| ModelStep { id: s.id.clone(), description: s.description.clone(), done: false })
            .collect();
        let next_id = plan
            .steps()
            .iter()
            .filter_map(|s| s.id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()))
            .max()
            .unwrap_or(0)
            + 1;
        ModelPlan { active, cancelled, next_id }
    }

    /// Apply the decision by plain list manipulation; `None` when any edit
    /// dangles (the whole decision must then be rejected).
    fn apply(&self, decision: &ReflectionDecision) -> Option<ModelPlan> {
        if !decision.update_needed {
            return Some(self.clone());
        }
        let mut model = self.clone();
        for edit in &decision.edits {
            match edit {
                PlanEdit::Add { description, position } => {
                    let at = (*position).min(model.active.len());
                    model.active.insert(
                        at,
                        ModelStep {
                            id: format!("s{}", model.next_id),
                            description: description.clone(),
                            done: false,
                        },
                    );
                    model.next_id += 1;
                }
                PlanEdit::Cancel { step_id } => {
                    let idx = model.active.iter().position(|s| &s.id == step_id)?;
                    let step = model.active.remove(idx);
                    model.cancelled.push(step);
                }
                PlanEdit::Reprioritize { step_id, new_position } => {
                    let idx = model.active.iter().position(|s| &s.id == step_id)?;
                    let step = model.active.remove(idx);
                    model.active.insert((*new_position).min(model.active.len()), step);
                }
            }
        }
        Some(model)
    }
}

#[test]
fn criterion_08_plan_edits_match_list_model_oracle() {
    let mut rng = StdRng::seed_from_u64(0xACC8);

    for case in 0..1000 {
        // Random plan of 1..=10 steps, some already done, some cancelled.
        let step_count = rng.gen_range(1..=10usize);
        let descriptions: Vec<String> =
            (0..step_count).map(|i| format!("case {case} step {i}")).collect();
        let mut plan = ResearchPlan::from_steps(format!("topic {case}"), descriptions).unwrap();
        for i in 0..step_count {
            if rng.gen_bool(0.2) {
                plan.mark_done(&format!("s{}", i + 1));
            }
        }
        if step_count > 1 && rng.gen_bool(0.3) {
            let victim = format!("s{}", rng.gen_range(1..=step_count));
            let cancel = ReflectionDecision {
                update_needed: true,
                rationale: "setup".into(),
                edits: vec![PlanEdit::Cancel { step_id: victim }],
            };
            plan = apply_edits(&plan, &cancel).unwrap();
        }

        // Random decision: 10% no-op, otherwise 1..=6 mixed edits whose ids
        // are usually real but sometimes dangle.
        let decision = if rng.gen_bool(0.1) {
            ReflectionDecision::no_op("looks fine")
        } else {
            let mut edits = Vec::new();
            for e in 0..rng.gen_range(1..=6usize) {
                let pick_id = |rng: &mut StdRng, model: &ModelPlan| -> String {
                    let roll: f64 = rng.gen();
                    if roll < 0.75 && !model.active.is_empty() {
                        model.active[rng.gen_range(0..model.active.len())].id.clone()
                    } else if roll < 0.85 && !model.cancelled.is_empty() {
                        model.cancelled[rng.gen_range(0..model.cancelled.len())].id.clone()
                    } else {
                        format!("s{}", rng.gen_range(90..99))
                    }
                };
                // Ids are picked against the *starting* state on purpose: a
                // mid-decision dangling reference must reject the whole
                // decision, and the oracle must agree.
                let model = ModelPlan::from_plan(&plan);
                edits.push(match rng.gen_range(0..3) {
                    0 => PlanEdit::Add {
                        description: format!("case {case} added {e}"),
                        position: rng.gen_range(0..=12),
                    },
                    1 => PlanEdit::Cancel { step_id: pick_id(&mut rng, &model) },
                    _ => PlanEdit::Reprioritize {
                        step_id: pick_id(&mut rng, &model),
                        new_position: rng.gen_range(0..=12),
                    },
                });
            }
            ReflectionDecision { update_needed: true, rationale: format!("case {case}"), edits }
        };

        let before = plan.clone();
        let oracle = ModelPlan::from_plan(&plan).apply(&decision);
        match (apply_edits(&plan, &decision), oracle) {
            (Ok(updated), Some(expected)) => {
                assert_eq!(ModelPlan::from_plan(&updated).active, expected.active, "case {case}");
                // Cancelled steps are always retained, in every version.
                let cancelled_ids: HashSet<String> = updated
                    .steps()
                    .iter()
                    .filter(|s| s.status == StepStatus::Cancelled)
                    .map(|s| s.id.clone())
                    .collect();
                let expected_ids: HashSet<String> =
                    expected.cancelled.iter().map(|s| s.id.clone()).collect();
                assert_eq!(cancelled_ids, expected_ids, "case {case}");
                let expected_version =
                    if decision.update_needed { before.version() + 1 } else { before.version() };
                assert_eq!(updated.version(), expected_version, "case {case}");
            }
            (Err(_), None) => {
                assert_eq!(plan, before, "case {case}: rejected decision must not mutate");
            }
            (got, want) => panic!(
                "case {case}: engine and oracle disagree on acceptance: engine={:?} oracle_accepts={}",
                got.map(|p| p.version()),
                want.is_some()
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// 9. Persistence round-trip and interrupt/resume
// ---------------------------------------------------------------------------

fn random_context(case: usize, rng: &mut StdRng) -> GlobalResearchContext {
    let mut ctx = GlobalResearchContext::new(
        format!("persisted topic {case}"),
        format!("run-{case:04}"),
    );
    let plan = ResearchPlan::from_steps(
        format!("persisted topic {case}"),
        (0..rng.gen_range(1..=4)).map(|i| format!("step {i}")).collect(),
    )
    .unwrap();
    if rng.gen_bool(0.8) {
        ctx.record_plan_version(plan.clone(), "initial curation");
    }
    for seq in 1..=rng.gen_range(0..=5u64) {
        let mut t = sample_trajectory(seq, &format!("query {case} {seq}"), "some answer");
        t.low_confidence = rng.gen_bool(0.2);
        t.synthesized_answer.merge_fallback = rng.gen_bool(0.1);
        t.artifacts = (0..rng.gen_range(0..=3))
            .map(|i| {
                result(
                    &format!("https://p{case}.example/{seq}/{i}"),
                    &format!("Title {i}"),
                    "artifact content with several words in it",
                    (rng.gen_range(30..=100) as f64) / 100.0,
                )
            })
            .collect();
        ctx.append_trajectory(t).unwrap();
    }
    for i in 0..rng.gen_range(0..=3) {
        ctx.record_progress(ProgressAssessment {
            percent: (rng.gen_range(0..=1000) as f64) / 10.0,
            rationale: format!("judgment {i}"),
            unexplored_areas: vec![format!("area {i}")],
        });
    }
    ctx
}

#[test]
fn criterion_09_persistence_round_trip_and_resume_equality() {
    // Part 1: save/load is the identity on 500 randomized contexts.
    let mut rng = StdRng::seed_from_u64(0xACC9);
    let dir = tempfile::tempdir().unwrap();
    for case in 0..500 {
        let ctx = random_context(case, &mut rng);
        let status = if rng.gen_bool(0.5) {
            RunStatus::InProgress { iterations_completed: ctx.trajectories().len() as u64 }
        } else {
            RunStatus::Terminal {
                reason: [
                    TerminationReason::ThresholdReached,
                    TerminationReason::MaxIterationsExhausted,
                    TerminationReason::AbortedError,
                ][rng.gen_range(0..3)],
                final_progress: (rng.gen_range(0..=1000) as f64) / 10.0,
            }
        };
        let config =
            if rng.gen_bool(0.5) { Some(OrchestratorConfig::default()) } else { None };
        let file = ContextFile::new(status, config, ctx);
        let path = dir.path().join(format!("ctx-{case}.json"));
        file.save(&path).unwrap();
        let loaded = ContextFile::load(&path).unwrap();
        assert_eq!(loaded, file, "case {case}: save/load must be the identity");
    }

    // Part 2: interrupt after iteration 2, resume, and end deep-equal to the
    // uninterrupted run.
    let queries: Vec<String> = (0..3).map(|i| format!("resume angle {i}")).collect();
    let percents = [30.0, 60.0, 92.0];
    let script = full_run_script(&queries, &percents);
    let config = OrchestratorConfig::default();

    let reference = scripted_orchestrator(script.clone(), config.clone()).run("resume demo");

    let path = dir.path().join("resume.json");
    let orc = scripted_orchestrator(script.clone(), config.clone()).with_checkpoint(path.clone());
    let mut state = orc.init_state("resume demo");
    while state.record.iterations_completed < 2 {
        state = orc.step(state).unwrap();
    }
    drop(state); // simulate the process dying mid-run

    // Entries consumed before the interrupt: 1 plan + 2 iterations x 7 calls.
    let tail = Script {
        mode: ScriptMode::Sequential,
        entries: script.entries[1 + 2 * 7..].to_vec(),
    };
    let resumer = scripted_orchestrator(tail, config).with_checkpoint(path.clone());
    let file = ContextFile::load(&path).unwrap();
    let resumed = resumer.drive(resumer.state_from_checkpoint(&file).unwrap());

    assert_eq!(resumed.context, reference.context, "resumed context must deep-equal");
    assert_eq!(resumed.record.termination_reason, reference.record.termination_reason);
    assert_eq!(resumed.record.final_progress, reference.record.final_progress);
    // The resumed event log equals the reference log from the interruption on.
    let offset = reference.record.events.len() - resumed.record.events.len();
    assert_eq!(resumed.record.events, reference.record.events[offset..]);
}

// ---------------------------------------------------------------------------
// 10. One-shot report generation
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_report_is_one_call_and_keeps_every_answer() {
    let mut rng = StdRng::seed_from_u64(0xACCA);

    let mut ctx = GlobalResearchContext::new("budget topic", "run-budget");
    let plan =
        ResearchPlan::from_steps("budget topic", vec!["survey".into(), "compare".into()]).unwrap();
    ctx.record_plan_version(plan.clone(), "initial curation");
    let mut sentinels = Vec::new();
    for seq in 1..=5u64 {
        let sentinel = format!("ANSWER-FACT-{seq}-{:08x}", rng.gen::<u32>());
        let mut t = sample_trajectory(
            seq,
            &format!("budget angle {seq}"),
            &format!("the key finding is {sentinel}"),
        );
        // Bulky artifacts force budget pressure onto the droppable tier.
        t.artifacts = (0..3)
            .map(|i| {
                result(
                    &format!("https://b.example/{seq}/{i}"),
                    "Bulk",
                    &"long artifact excerpt text ".repeat(40),
                    0.7,
                )
            })
            .collect();
        ctx.append_trajectory(t).unwrap();
        sentinels.push(sentinel);
    }

    let minimum = min_render_budget(&ctx);
    let full = estimate_tokens(&render_context(&ctx, usize::MAX).unwrap());
    assert!(full > minimum, "artifacts must actually exceed the mandatory tier");

    for budget in [minimum, minimum + 1, minimum + 17, (minimum + full) / 2, full, full * 10] {
        let recorder = RecordingProvider::new(Arc::new(ScriptedProvider::new(
            Script::keyed().repeat_text("report", "# Report\nfull body").build(),
        )));
        let writer = ReportWriter::new(
            Arc::new(Gateway::new(recorder.clone())),
            Arc::new(PromptSet::default()),
            Arc::new(FixedClock::epoch()),
        );
        let report = writer.generate_report(&plan, &ctx, budget).unwrap();
        assert!(!report.body.is_empty());

        let requests = recorder.requests();
        assert_eq!(requests.len(), 1, "budget {budget}: report must be exactly one call");
        assert_eq!(requests[0].request_tag, "report");
        for sentinel in &sentinels {
            assert!(
                requests[0].user_prompt.contains(sentinel),
                "budget {budget}: writer prompt dropped synthesized answer fact {sentinel}"
            );
        }
    }

    // Below the documented minimum the writer refuses instead of silently
    // dropping mandatory content.
    let recorder = RecordingProvider::new(Arc::new(ScriptedProvider::new(
        Script::keyed().repeat_text("report", "body").build(),
    )));
    let writer = ReportWriter::new(
        Arc::new(Gateway::new(recorder.clone())),
        Arc::new(PromptSet::default()),
        Arc::new(FixedClock::epoch()),
    );
    assert!(writer.generate_report(&plan, &ctx, minimum - 1).is_err());
    assert!(recorder.requests().is_empty(), "refusal must happen before any LLM call");
}

// ---------------------------------------------------------------------------
// 11. Monolithic driver ≡ single-step driver
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_run_and_step_iteration_produce_identical_logs() {
    let mut rng = StdRng::seed_from_u64(0xACCB);

    for case in 0..20 {
        let (script, config, topic) = random_run_setup(case, &mut rng);

        let monolithic = scripted_orchestrator(script.clone(), config.clone()).run(&topic);

        let stepper = scripted_orchestrator(script, config);
        let mut state = stepper.init_state(&topic);
        while !state.is_terminal() {
            state = stepper.step(state).unwrap();
        }

        assert_eq!(
            monolithic.record.events, state.record.events,
            "case {case}: drivers must log identical events"
        );
        assert_eq!(monolithic.record.transition_string(), state.record.transition_string());
        assert_eq!(monolithic.context, state.ctx, "case {case}: drivers must build identical contexts");
        assert_eq!(monolithic.report, state.report);
    }
}
