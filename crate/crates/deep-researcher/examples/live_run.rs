//! A real research run against live HTTP backends. Gated on environment
//! variables so it degrades to a usage note instead of failing when no
//! credentials are configured:
//!
//! ```sh
//! export DEEP_RESEARCH_LLM_API_KEY=...      # OpenAI-compatible chat API
//! export DEEP_RESEARCH_LLM_BASE_URL=...    # optional, provider default otherwise
//! export DEEP_RESEARCH_LLM_MODEL=...       # optional model override
//! export DEEP_RESEARCH_SEARCH_API_KEY=...  # Tavily-compatible search API
//! cargo run --example live_run -- "your research topic"
//! ```

use deep_researcher::run::{
    cmd_run, ConfigOverrides, ProviderSelection, RunManifest, LLM_API_KEY_ENV, SEARCH_API_KEY_ENV,
};

fn main() {
    let missing: Vec<&str> = [LLM_API_KEY_ENV, SEARCH_API_KEY_ENV]
        .into_iter()
        .filter(|var| std::env::var(var).map_or(true, |v| v.trim().is_empty()))
        .collect();
    if !missing.is_empty() {
        println!("live_run is gated on credentials; not set: {}", missing.join(", "));
        println!("export them and re-run, or try the offline examples:");
        println!("  cargo run --example scripted_end_to_end");
        println!("  cargo run --example resume_interrupted");
        return;
    }

    let topic = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "current state of sodium-ion battery commercialization".to_string());
    let out_dir = std::env::temp_dir().join("deep-researcher-live-run");

    // Keep the live demo cheap: few iterations, default threshold and
    // candidate fan-out.
    let manifest = RunManifest {
        topic,
        out_dir: out_dir.clone(),
        provider: ProviderSelection::Live,
        config_file: None,
        script: None,
        fixtures_dir: None,
        prompts_dir: None,
        overrides: ConfigOverrides { max_iterations: Some(3), threshold: None, candidates: None },
    };

    match cmd_run(&manifest) {
        Ok(artifacts) => {
            let record = &artifacts.output.record;
            println!(
                "run {} finished after {} iteration(s), judged progress {}%",
                artifacts.output.context.run_id(),
                record.iterations_completed,
                record.final_progress,
            );
            println!("context:  {}", artifacts.context_path.display());
            println!("events:   {}", artifacts.events_path.display());
            println!("llm log:  {}", artifacts.llm_log_path.display());
            if let Some(report) = &artifacts.report_path {
                println!("report:   {}", report.display());
            }
        }
        Err(err) => {
            eprintln!("live run failed: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
