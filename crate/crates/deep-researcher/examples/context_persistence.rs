//! The global research context as a durable artifact: append-only growth,
//! budget-bounded prompt rendering, and atomic save/load.
//!
//! ```sh
//! cargo run --example context_persistence
//! ```

use chrono::{TimeZone, Utc};
use deep_researcher::context::{
    estimate_tokens, min_render_budget, render_context, ContextFile, GlobalResearchContext,
    RunStatus, Trajectory,
};
use deep_researcher::search::{result, SearchQuery};
use deep_researcher::searcher::{CandidateAnswer, SynthesizedAnswer};

fn trajectory(seq_no: u64, query: &str, answer: &str) -> Trajectory {
    Trajectory {
        seq_no,
        query: SearchQuery::new(query, seq_no),
        artifacts: vec![result(
            &format!("https://example.org/{seq_no}"),
            "Evidence",
            &"a fairly long supporting excerpt that the renderer may drop under budget pressure "
                .repeat(4),
            0.7,
        )],
        candidate_answers: vec![CandidateAnswer { candidate_id: 1, text: answer.to_string() }],
        synthesized_answer: SynthesizedAnswer {
            text: answer.to_string(),
            source_urls: vec![format!("https://example.org/{seq_no}")],
            contributing_candidates: vec![1],
            merge_fallback: false,
        },
        low_confidence: false,
        created_at: Utc.timestamp_opt(1_760_000_000 + seq_no as i64, 0).unwrap(),
    }
}

fn main() {
    let mut ctx = GlobalResearchContext::new("urban rooftop solar economics", "run-demo");
    ctx.append_trajectory(trajectory(1, "rooftop solar installed cost 2026", "Costs fell 12% year over year."))
        .unwrap();
    ctx.append_trajectory(trajectory(2, "rooftop solar payback period by region", "Payback ranges 6-11 years."))
        .unwrap();
    ctx.append_trajectory(trajectory(3, "net metering policy changes", "Three states revised tariffs."))
        .unwrap();

    // Rendering is deterministic and budget-bounded. Queries and synthesized
    // answers always survive; artifact excerpts are dropped oldest-first.
    let unbounded = render_context(&ctx, usize::MAX).unwrap();
    let full_cost = estimate_tokens(&unbounded);
    let floor = min_render_budget(&ctx);
    println!("full render: {full_cost} estimated tokens; mandatory tier: {floor} tokens\n");

    let tight = render_context(&ctx, floor).unwrap();
    println!("--- render at the mandatory floor ({floor} tokens) ---\n{tight}");

    match render_context(&ctx, floor - 1) {
        Err(e) => println!("--- below the floor ---\n{e}\n"),
        Ok(_) => unreachable!("budget below the mandatory tier cannot render"),
    }

    // Persistence is atomic (temp file + rename) and versioned.
    let dir = std::env::temp_dir().join("deep-researcher-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("context.json");
    let file = ContextFile::new(
        RunStatus::InProgress { iterations_completed: 3 },
        None,
        ctx,
    );
    file.save(&path).unwrap();
    let loaded = ContextFile::load(&path).unwrap();
    assert_eq!(loaded, file);
    println!("saved and reloaded {} — {} trajectories, byte-identical", path.display(), loaded.context.trajectories().len());
}
