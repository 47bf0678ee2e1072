//! Property tests for the engine's structural invariants, driven by
//! proptest-generated inputs rather than fixed examples.

use proptest::prelude::*;

use chrono::{TimeZone, Utc};
use deep_researcher::context::{
    estimate_tokens, min_render_budget, normalize_query, render_context, ContextFile,
    GlobalResearchContext, RenderError, RunStatus, Trajectory,
};
use deep_researcher::gateway::{extract_json_block, DecodingParams};
use deep_researcher::planner::{apply_edits, PlanEdit, ReflectionDecision, ResearchPlan};
use deep_researcher::search::{filter_by_score, result, RawSearchResult, SearchQuery};
use deep_researcher::searcher::{CandidateAnswer, CrossoverConfig, SynthesizedAnswer};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

fn score_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0..=100u32).prop_map(|n| n as f64 / 100.0),
        (0.0..=1.0f64),
    ]
}

fn results_strategy() -> impl Strategy<Value = Vec<RawSearchResult>> {
    prop::collection::vec(score_strategy(), 0..12).prop_map(|scores| {
        scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| result(&format!("https://p.example/{i}"), &format!("R{i}"), "text", s))
            .collect()
    })
}

fn words_strategy(max_words: usize) -> impl Strategy<Value = String> {
    prop::collection::vec("[a-zA-Z0-9]{1,8}", 1..=max_words).prop_map(|w| w.join(" "))
}

fn context_strategy() -> impl Strategy<Value = GlobalResearchContext> {
    (
        words_strategy(5),
        prop::collection::vec((words_strategy(6), words_strategy(30)), 0..5),
        prop::collection::vec(words_strategy(60), 0..4),
    )
        .prop_map(|(topic, qa, artifact_texts)| {
            let mut ctx = GlobalResearchContext::new(topic, "run-prop");
            for (i, (query, answer)) in qa.iter().enumerate() {
                let seq = i as u64 + 1;
                let artifacts: Vec<RawSearchResult> = artifact_texts
                    .iter()
                    .enumerate()
                    .map(|(j, text)| {
                        result(&format!("https://a.example/{seq}/{j}"), "Art", text, 0.5)
                    })
                    .collect();
                ctx.append_trajectory(Trajectory {
                    seq_no: seq,
                    query: SearchQuery::new(query.clone(), seq),
                    artifacts,
                    candidate_answers: vec![CandidateAnswer {
                        candidate_id: 1,
                        text: answer.clone(),
                    }],
                    synthesized_answer: SynthesizedAnswer {
                        text: answer.clone(),
                        source_urls: vec![],
                        contributing_candidates: vec![1],
                        merge_fallback: false,
                    },
                    low_confidence: false,
                    created_at: Utc.timestamp_opt(1_700_000_000 + seq as i64, 0).unwrap(),
                })
                .unwrap();
            }
            ctx
        })
}

// ---------------------------------------------------------------------------
// Search filtering
// ---------------------------------------------------------------------------

proptest! {
    /// The relevance filter keeps exactly the results at or above the
    /// threshold, preserves input order, and is idempotent.
    #[test]
    fn filter_is_an_order_preserving_threshold_cut(
        results in results_strategy(),
        threshold in 0.0..=1.0f64,
    ) {
        let kept = filter_by_score(&results, threshold);
        prop_assert!(kept.iter().all(|r| r.score >= threshold));

        // Order-preserving subsequence: kept urls appear in input order.
        let mut input_iter = results.iter();
        for k in &kept {
            prop_assert!(input_iter.any(|r| r.url == k.url));
        }

        // Nothing at/above the threshold was dropped.
        let above = results.iter().filter(|r| r.score >= threshold).count();
        prop_assert_eq!(kept.len(), above);

        // Idempotence.
        let twice = filter_by_score(&kept, threshold);
        prop_assert_eq!(&twice, &kept);
    }
}

// ---------------------------------------------------------------------------
// Query normalization
// ---------------------------------------------------------------------------

proptest! {
    /// Normalization is idempotent and insensitive to case and whitespace
    /// layout.
    #[test]
    fn normalization_is_idempotent_and_canonical(words in prop::collection::vec("[a-zA-Z]{1,10}", 1..6)) {
        let clean = words.join(" ");
        let noisy = format!("  {}  ", words.join("   ").to_uppercase());
        prop_assert_eq!(normalize_query(&clean), normalize_query(&noisy));
        let once = normalize_query(&noisy);
        prop_assert_eq!(normalize_query(&once), once.clone());
        prop_assert!(!once.chars().any(|c| c.is_uppercase()));
    }
}

// ---------------------------------------------------------------------------
// Plan edits
// ---------------------------------------------------------------------------

fn edits_strategy(step_count: usize) -> impl Strategy<Value = Vec<PlanEdit>> {
    let edit = prop_oneof![
        (words_strategy(4), 0..=12usize)
            .prop_map(|(description, position)| PlanEdit::Add { description, position }),
        (1..=step_count + 2).prop_map(|n| PlanEdit::Cancel { step_id: format!("s{n}") }),
        (1..=step_count + 2, 0..=12usize).prop_map(|(n, new_position)| {
            PlanEdit::Reprioritize { step_id: format!("s{n}"), new_position }
        }),
    ];
    prop::collection::vec(edit, 0..6)
}

proptest! {
    /// Accepted decisions bump the version by exactly one and never lose a
    /// step: the id set afterwards is the id set before plus the added ids,
    /// and cancelled ids never disappear.
    #[test]
    fn apply_edits_preserves_steps_and_versions(
        step_count in 1..=10usize,
        edits in edits_strategy(10),
    ) {
        let plan = ResearchPlan::from_steps(
            "prop topic",
            (0..step_count).map(|i| format!("step {i}")).collect(),
        ).unwrap();
        let decision = ReflectionDecision {
            update_needed: true,
            rationale: "prop".into(),
            edits: edits.clone(),
        };

        let before_ids: Vec<String> = plan.steps().iter().map(|s| s.id.clone()).collect();
        match apply_edits(&plan, &decision) {
            Ok(updated) => {
                prop_assert_eq!(updated.version(), plan.version() + 1);
                let adds = edits.iter().filter(|e| matches!(e, PlanEdit::Add { .. })).count();
                prop_assert_eq!(updated.steps().len(), before_ids.len() + adds);
                for id in &before_ids {
                    prop_assert!(updated.step(id).is_some(), "step {} vanished", id);
                }
                // Active positions are a permutation of 0..k.
                let mut positions: Vec<usize> =
                    updated.active_steps().iter().map(|s| s.position).collect();
                positions.sort_unstable();
                let expected: Vec<usize> = (0..positions.len()).collect();
                prop_assert_eq!(positions, expected);
            }
            Err(_) => {
                // Rejection must leave the input untouched (purity) — the
                // original plan still validates and still has its steps.
                for id in &before_ids {
                    prop_assert!(plan.step(id).is_some());
                }
            }
        }
    }

    /// A no-op decision is the identity on the plan.
    #[test]
    fn no_op_decision_is_identity(step_count in 1..=10usize) {
        let plan = ResearchPlan::from_steps(
            "prop topic",
            (0..step_count).map(|i| format!("step {i}")).collect(),
        ).unwrap();
        let out = apply_edits(&plan, &ReflectionDecision::no_op("fine")).unwrap();
        prop_assert_eq!(out, plan);
    }
}

// ---------------------------------------------------------------------------
// Context rendering budget
// ---------------------------------------------------------------------------

proptest! {
    /// Rendering succeeds exactly when the budget covers the mandatory tier;
    /// successful renders respect the budget, keep every query and answer,
    /// and are deterministic.
    #[test]
    fn render_respects_budget_and_mandatory_tier(
        ctx in context_strategy(),
        slack in 0..400usize,
    ) {
        let minimum = min_render_budget(&ctx);
        let budget = minimum + slack;

        let rendered = render_context(&ctx, budget);
        prop_assert!(rendered.is_ok(), "budget {} >= minimum {} must render", budget, minimum);
        let text = rendered.unwrap();
        prop_assert!(estimate_tokens(&text) <= budget);
        prop_assert!(text.contains(ctx.topic()));
        for t in ctx.trajectories() {
            prop_assert!(text.contains(&t.query.text), "query dropped from render");
            prop_assert!(text.contains(&t.synthesized_answer.text), "answer dropped from render");
        }

        // Deterministic: same context and budget, same bytes.
        prop_assert_eq!(render_context(&ctx, budget).unwrap(), text);

        if minimum > 0 {
            match render_context(&ctx, minimum - 1) {
                Err(RenderError::BudgetTooSmall { budget: b, required }) => {
                    prop_assert_eq!(b, minimum - 1);
                    prop_assert_eq!(required, minimum);
                }
                other => prop_assert!(false, "sub-minimum budget must fail, got {:?}", other.map(|s| s.len())),
            }
        }
    }

    /// The token estimator is exactly ceil(chars / 4).
    #[test]
    fn token_estimate_is_ceil_div_four(text in ".{0,200}") {
        let chars = text.chars().count();
        prop_assert_eq!(estimate_tokens(&text), chars.div_ceil(4));
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

proptest! {
    /// Save/load through the JSON file format is the identity.
    #[test]
    fn context_file_round_trips(ctx in context_strategy(), terminal in any::<bool>()) {
        let status = if terminal {
            RunStatus::Terminal {
                reason: deep_researcher::orchestrator::TerminationReason::ThresholdReached,
                final_progress: 93.5,
            }
        } else {
            RunStatus::InProgress { iterations_completed: ctx.trajectories().len() as u64 }
        };
        let file = ContextFile::new(status, None, ctx);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ctx.json");
        file.save(&path).unwrap();
        let loaded = ContextFile::load(&path).unwrap();
        prop_assert_eq!(loaded, file);
    }
}

// ---------------------------------------------------------------------------
// Structured-output extraction
// ---------------------------------------------------------------------------

proptest! {
    /// A JSON object survives fenced-block wrapping and surrounding prose.
    #[test]
    fn json_extraction_finds_wrapped_objects(
        percent in 0.0..=100.0f64,
        rationale in words_strategy(8),
        fenced in any::<bool>(),
    ) {
        let body = serde_json::json!({ "percent": percent, "rationale": rationale });
        let raw = if fenced {
            format!("Here is my assessment:\n```json\n{body}\n```\nDone.")
        } else {
            format!("Assessment below.\n{body}\ntrailing words")
        };
        let block = extract_json_block(&raw).expect("block found");
        let parsed: serde_json::Value = serde_json::from_str(block).unwrap();
        prop_assert_eq!(parsed, body);
    }
}

// ---------------------------------------------------------------------------
// Decoding parameters and candidate schedules
// ---------------------------------------------------------------------------

proptest! {
    /// Validation accepts exactly temperature in [0,2] and top_k >= 1.
    #[test]
    fn decoding_validation_bounds(temperature in -1.0..=3.0f64, top_k in 0..=200u32) {
        let ok = DecodingParams::new(temperature, top_k).is_ok();
        prop_assert_eq!(ok, (0.0..=2.0).contains(&temperature) && top_k >= 1);
    }

    /// Every generated candidate roster — any size — has unique ids and
    /// pairwise-distinct decoding parameter pairs.
    #[test]
    fn candidate_schedules_are_pairwise_distinct(n in 1..=12usize) {
        let cfg = CrossoverConfig::with_candidate_count(n);
        prop_assert_eq!(cfg.candidates.len(), n);
        prop_assert!(cfg.validate().is_ok());
        let mut pairs: Vec<(u64, u32)> = cfg
            .candidates
            .iter()
            .map(|c| (c.decoding.temperature().to_bits(), c.decoding.top_k()))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        prop_assert_eq!(pairs.len(), n, "decoding pairs must be pairwise distinct");
    }
}
