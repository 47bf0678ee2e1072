//! A complete research run against fully deterministic backends: a scripted
//! LLM transcript and an in-memory search index. No network, no credentials.
//!
//! ```sh
//! cargo run --example scripted_end_to_end
//! ```

use std::sync::Arc;

use deep_researcher::clock::FixedClock;
use deep_researcher::gateway::{Gateway, Script, ScriptedProvider};
use deep_researcher::orchestrator::{Deps, Orchestrator, OrchestratorConfig};
use deep_researcher::prompts::PromptSet;
use deep_researcher::report::render_markdown;
use deep_researcher::search::{result, InMemoryBackend, SearchClient};

fn main() {
    // The transcript below is what the LLM "says" at each step of the loop:
    // one plan, three research iterations (judged 35% -> 70% -> 94%), one
    // report. Tags match the request tags the engine uses for each call.
    let mut script = Script::sequential().text(
        "plan",
        r#"{"steps": [
            "map current solid-state battery chemistries",
            "collect cycle-life and energy-density figures",
            "compare manufacturing readiness"
        ]}"#,
    );
    for (i, (query, percent)) in [
        ("solid-state battery chemistries overview", 35.0),
        ("solid-state battery cycle life energy density figures", 70.0),
        ("solid-state battery manufacturing readiness 2026", 94.0),
    ]
    .iter()
    .enumerate()
    {
        script = script
            .text(
                "search-query",
                &format!(
                    r#"{{"query": "{query}", "rationale": "next plan gap", "plan_step_ref": "s{}"}}"#,
                    i + 1
                ),
            )
            .text("candidate-1", &format!("Conservative reading of the sources on {query}."))
            .text("candidate-2", &format!("Balanced synthesis of the evidence on {query}."))
            .text("candidate-3", &format!("Exploratory take highlighting outliers in {query}."))
            .text("merge", &format!("Merged answer for `{query}`, keeping all three readings."))
            .text(
                "reflection",
                r#"{"update_needed": false, "rationale": "plan still fits the findings", "edits": []}"#,
            )
            .text(
                "progress",
                &format!(
                    r#"{{"percent": {percent}, "rationale": "coverage growing", "unexplored_areas": []}}"#
                ),
            );
    }
    let script = script
        .text(
            "report",
            "# Solid-State Batteries: State of Play\n\nAll three synthesized answers \
             feed this single-pass report.",
        )
        .build();

    // Every query resolves to the same small result set here; real runs use
    // a live search API or recorded fixtures.
    let results = vec![
        result("https://example.org/chemistries", "Chemistry survey", "sulfide vs oxide electrolytes", 0.91),
        result("https://example.org/cycle-life", "Cycle-life data", "1,000+ cycles at 80% retention", 0.64),
        result("https://example.org/manufacturing", "Manufacturing outlook", "pilot lines scaling", 0.42),
        result("https://example.org/blogspam", "Low-signal post", "vague hype", 0.12),
    ];

    let orchestrator = Orchestrator::new(
        OrchestratorConfig::default(),
        Deps {
            gateway: Arc::new(Gateway::new(Arc::new(ScriptedProvider::new(script)))),
            search: Arc::new(SearchClient::new(Box::new(InMemoryBackend::with_default(results)))),
            prompts: Arc::new(PromptSet::default()),
            clock: Arc::new(FixedClock::epoch()),
        },
    )
    .expect("default config is valid");

    let out = orchestrator.run("solid-state batteries for electric vehicles");

    println!("run id:       {}", out.record.run_id);
    println!("iterations:   {}", out.record.iterations_completed);
    println!("termination:  {:?}", out.record.termination_reason.unwrap());
    println!("transitions:  {}", out.record.transition_string());
    println!();
    println!("event log:");
    for event in &out.record.events {
        println!("  [{:>2}] {:7?} {}", event.iteration, event.kind, event.detail);
    }
    println!();
    println!("{}", render_markdown(&out.report.expect("report generated")));
}
