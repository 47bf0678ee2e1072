//! The candidate-crossover answering algorithm in isolation: one query is
//! answered by three candidates under pairwise-distinct decoding parameters,
//! then merged into a single synthesized answer that keeps each candidate's
//! contribution.
//!
//! ```sh
//! cargo run --example candidate_crossover
//! ```

use std::sync::Arc;

use deep_researcher::clock::FixedClock;
use deep_researcher::gateway::{Gateway, RecordingProvider, Script, ScriptedProvider};
use deep_researcher::prompts::PromptSet;
use deep_researcher::search::{result, InMemoryBackend, SearchClient, SearchQuery};
use deep_researcher::searcher::{CrossoverConfig, Searcher};

fn main() {
    // Each candidate plants one distinct "fact" in its answer; the scripted
    // merge echoes its own prompt so the output shows exactly what the merge
    // call gets to work with.
    let script = Script::keyed()
        .text("candidate-1", "The 2024 market size was $4.2B (fact A).")
        .text("candidate-2", "Growth is projected at 11% CAGR (fact B).")
        .text("candidate-3", "Three vendors hold 70% share (fact C).")
        .echo("merge")
        .build();

    let recorder = RecordingProvider::new(Arc::new(ScriptedProvider::new(script)));
    let searcher = Searcher::new(
        Arc::new(Gateway::new(recorder.clone())),
        Arc::new(SearchClient::new(Box::new(InMemoryBackend::new()))),
        Arc::new(PromptSet::default()),
        Arc::new(FixedClock::epoch()),
        2,
    );

    let query = SearchQuery::new("industrial robotics market size and growth", 1);
    let artifacts = vec![
        result("https://example.org/report", "Market report", "market sizing tables", 0.88),
        result("https://example.org/brief", "Analyst brief", "vendor share estimates", 0.55),
    ];

    let cfg = CrossoverConfig::default();
    println!("candidate decoding schedule:");
    for c in &cfg.candidates {
        println!(
            "  candidate-{}: temperature {:.1}, top_k {}",
            c.candidate_id,
            c.decoding.temperature(),
            c.decoding.top_k()
        );
    }

    let answers = searcher
        .answer_with_candidates(&query, &artifacts, &cfg)
        .expect("all scripted candidates reply");
    println!("\ncandidate answers:");
    for a in &answers {
        println!("  [{}] {}", a.candidate_id, a.text);
    }

    let merged = searcher.crossover_merge(&query, &answers, &artifacts, &cfg);
    println!("\nsynthesized answer (merge echoed its prompt):\n---\n{}\n---", merged.text);
    println!("contributing candidates: {:?}", merged.contributing_candidates);
    println!("source urls:             {:?}", merged.source_urls);
    println!("merge fallback:          {}", merged.merge_fallback);

    // The recording wrapper shows that all three candidate calls carried the
    // same prompt but different decoding parameters.
    let candidate_calls: Vec<_> = recorder
        .requests()
        .into_iter()
        .filter(|r| r.request_tag.starts_with("candidate-"))
        .collect();
    println!(
        "\n{} candidate calls, {} distinct prompts, {} distinct decoding pairs",
        candidate_calls.len(),
        candidate_calls.iter().map(|r| r.user_prompt.as_str()).collect::<std::collections::HashSet<_>>().len(),
        candidate_calls
            .iter()
            .map(|r| (r.decoding.temperature().to_bits(), r.decoding.top_k()))
            .collect::<std::collections::HashSet<_>>()
            .len()
    );
}
