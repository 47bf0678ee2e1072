//! Thin command-line front end. All behavior lives in the library
//! (`deep_researcher::run`); this file only parses arguments, forwards them,
//! and maps outcomes to exit codes (0 report produced, 1 usage/config error,
//! 2 run aborted).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use deep_researcher::run::{
    cmd_inspect, cmd_resume, cmd_run, ConfigOverrides, ProviderSelection, ResumeManifest,
    RunArtifacts, RunManifest,
};

#[derive(Parser)]
#[command(
    name = "deep-researcher",
    version,
    about = "Iterative research engine: plans, searches, reflects, and writes a sourced report"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Research a topic end-to-end and write the report
    Run(RunArgs),
    /// Continue an interrupted run from its context file
    Resume(ResumeArgs),
    /// Print a human-readable summary of a stored context file
    Inspect {
        /// Path to a context.json written by run or resume
        context: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Backend selection: live, scripted, or fixtures
    #[arg(long, default_value = "live")]
    provider: ProviderSelection,
    /// TOML config file mirroring the orchestrator configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON transcript for the scripted provider
    #[arg(long)]
    script: Option<PathBuf>,
    /// Directory of recorded search results (scripted/fixtures providers)
    #[arg(long)]
    fixtures_dir: Option<PathBuf>,
    /// Directory of prompt templates (defaults to the built-in set)
    #[arg(long)]
    prompts_dir: Option<PathBuf>,
    /// Stop once judged progress reaches this percent (inclusive)
    #[arg(long)]
    threshold: Option<f64>,
    /// Unconditional cap on loop iterations
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Number of candidate answers sampled per query
    #[arg(long)]
    candidates: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            max_iterations: self.max_iterations,
            threshold: self.threshold,
            candidates: self.candidates,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Research topic
    #[arg(long)]
    topic: String,
    /// Output directory for context.json, events.jsonl, report.md
    #[arg(long, default_value = "research-out")]
    out_dir: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ResumeArgs {
    /// Path to the context.json of the interrupted run
    context: PathBuf,
    /// Output directory (defaults to the context file's directory)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; everything else is a
            // usage error and must exit 1.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let result = match cli.command {
        Command::Run(args) => {
            let manifest = RunManifest {
                topic: args.topic,
                out_dir: args.out_dir,
                provider: args.common.provider,
                config_file: args.common.config.clone(),
                script: args.common.script.clone(),
                fixtures_dir: args.common.fixtures_dir.clone(),
                prompts_dir: args.common.prompts_dir.clone(),
                overrides: args.common.overrides(),
            };
            cmd_run(&manifest).map(|artifacts| print_summary(&artifacts))
        }
        Command::Resume(args) => {
            let manifest = ResumeManifest {
                context_path: args.context,
                out_dir: args.out_dir,
                provider: args.common.provider,
                config_file: args.common.config.clone(),
                script: args.common.script.clone(),
                fixtures_dir: args.common.fixtures_dir.clone(),
                prompts_dir: args.common.prompts_dir.clone(),
                overrides: args.common.overrides(),
            };
            cmd_resume(&manifest).map(|artifacts| print_summary(&artifacts))
        }
        Command::Inspect { context } => cmd_inspect(&context).map(|text| print!("{text}")),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn print_summary(artifacts: &RunArtifacts) {
    let record = &artifacts.output.record;
    let reason = record
        .termination_reason
        .map(deep_researcher::run::reason_label)
        .unwrap_or("unknown");
    println!(
        "run {} finished: {} after {} iteration(s), judged progress {}%",
        record.run_id, reason, record.iterations_completed, record.final_progress
    );
    println!("context: {}", artifacts.context_path.display());
    println!("events:  {}", artifacts.events_path.display());
    if let Some(report) = &artifacts.report_path {
        println!("report:  {}", report.display());
    }
}
