//! Interrupting a checkpointed run and resuming it from disk. The resumed
//! run converges on exactly the same research context as an uninterrupted
//! reference run over the same transcript.
//!
//! ```sh
//! cargo run --example resume_interrupted
//! ```

use std::sync::Arc;

use deep_researcher::clock::FixedClock;
use deep_researcher::context::ContextFile;
use deep_researcher::gateway::{Gateway, Script, ScriptEntry, ScriptMode, ScriptedProvider};
use deep_researcher::orchestrator::{Deps, Orchestrator, OrchestratorConfig};
use deep_researcher::prompts::PromptSet;
use deep_researcher::search::{result, InMemoryBackend, SearchClient};

/// One loop iteration's worth of transcript: query draft, three candidates,
/// merge, no-op reflection, progress judgment — seven LLM replies.
fn iteration_entries(query: &str, percent: f64) -> Vec<ScriptEntry> {
    let mut script = Script::sequential();
    script = script
        .text(
            "search-query",
            &format!(r#"{{"query": "{query}", "rationale": "next gap", "plan_step_ref": null}}"#),
        )
        .text("candidate-1", &format!("first reading on {query}"))
        .text("candidate-2", &format!("second reading on {query}"))
        .text("candidate-3", &format!("third reading on {query}"))
        .text("merge", &format!("merged findings for {query}"))
        .text(
            "reflection",
            r#"{"update_needed": false, "rationale": "plan holds", "edits": []}"#,
        )
        .text(
            "progress",
            &format!(r#"{{"percent": {percent}, "rationale": "judged", "unexplored_areas": []}}"#),
        );
    script.build().entries
}

fn full_script() -> Script {
    let mut entries = Script::sequential()
        .text("plan", r#"{"steps": ["scout the area", "dig into numbers", "weigh options"]}"#)
        .build()
        .entries;
    for (i, percent) in [40.0, 75.0, 93.0].into_iter().enumerate() {
        entries.extend(iteration_entries(&format!("geothermal heat query {}", i + 1), percent));
    }
    entries.extend(Script::sequential().text("report", "# Findings\nthe full story").build().entries);
    Script { mode: ScriptMode::Sequential, entries }
}

fn orchestrator_for(script: Script) -> Orchestrator {
    let deps = Deps {
        gateway: Arc::new(Gateway::new(Arc::new(ScriptedProvider::new(script)))),
        search: Arc::new(SearchClient::new(Box::new(InMemoryBackend::with_default(vec![
            result("https://geo.example/a", "Survey", "district heating survey", 0.9),
            result("https://geo.example/b", "Costs", "drilling cost breakdown", 0.55),
        ])))),
        prompts: Arc::new(PromptSet::default()),
        clock: Arc::new(FixedClock::epoch()),
    };
    Orchestrator::new(OrchestratorConfig::default(), deps).unwrap()
}

fn main() {
    let script = full_script();
    let topic = "residential geothermal heating";

    // Reference: the same transcript, run start to finish without interruption.
    let reference = orchestrator_for(script.clone()).run(topic);

    // Interrupted run: checkpoints land after planning and after every
    // progress judgment. We step until two iterations are complete, then
    // drop the in-memory state — the "crash".
    let dir = std::env::temp_dir().join("deep-researcher-resume-example");
    std::fs::create_dir_all(&dir).unwrap();
    let checkpoint = dir.join("context.json");
    let orc = orchestrator_for(script.clone()).with_checkpoint(checkpoint.clone());
    let mut state = orc.init_state(topic);
    while state.record.iterations_completed < 2 {
        state = orc.step(state).unwrap();
    }
    drop(state);
    println!("interrupted after 2 iterations; checkpoint at {}", checkpoint.display());

    // Resume: load the checkpoint, rebuild the loop state, and drive it to
    // completion. The scripted provider only needs the unconsumed tail of
    // the transcript (iteration 3 + the report call).
    let consumed = 1 + 2 * 7; // plan + two full iterations
    let tail = Script { mode: ScriptMode::Sequential, entries: script.entries[consumed..].to_vec() };
    let orc = orchestrator_for(tail).with_checkpoint(checkpoint.clone());
    let file = ContextFile::load(&checkpoint).unwrap();
    let resumed_state = orc.state_from_checkpoint(&file).unwrap();
    println!(
        "resumed from checkpoint: {} iterations already banked",
        resumed_state.record.iterations_completed
    );
    let resumed = orc.drive(resumed_state);

    assert_eq!(resumed.context, reference.context);
    assert_eq!(resumed.record.termination_reason, reference.record.termination_reason);
    println!(
        "resumed run finished: {:?}, {} trajectories, judged progress {}%",
        resumed.record.termination_reason.unwrap(),
        resumed.context.trajectories().len(),
        resumed.record.final_progress,
    );
    println!("resumed context is identical to the uninterrupted reference run");

    // The checkpoint on disk is now terminal; a second resume is refused.
    let file = ContextFile::load(&checkpoint).unwrap();
    match orchestrator_for(full_script()).state_from_checkpoint(&file) {
        Err(e) => println!("resuming the finished run again is rejected: {e}"),
        Ok(_) => unreachable!("terminal checkpoints cannot be resumed"),
    }
}
