//! A sequential deep-research engine.
//!
//! The engine runs an iterative plan-search-reflect loop over a centralized
//! [`context::GlobalResearchContext`]: a planning agent curates a research
//! plan, a search agent generates web queries and answers them with the
//! candidate-crossover algorithm (n candidates with varied decoding
//! parameters, merged into one synthesized answer), the planner reflects on
//! the plan against everything learned so far and edits it at runtime, and an
//! LLM judge scores research progress. The loop halts when progress crosses a
//! threshold or an iteration cap is exhausted, after which a report writer
//! produces the final document in a single generation pass.
//!
//! Every LLM and web-search dependency sits behind a trait
//! ([`gateway::LlmProvider`], [`search::SearchBackend`]), so the whole loop
//! runs either against live HTTP backends or against fully deterministic
//! scripted providers and recorded search fixtures. The `examples/` directory
//! has one runnable example per capability; see the README for the tour.

pub mod clock;
pub mod context;
pub mod gateway;
pub mod orchestrator;
pub mod planner;
pub mod prompts;
pub mod report;
pub mod run;
pub mod search;
pub mod searcher;

pub use clock::{Clock, FixedClock, SystemClock};
pub use context::{GlobalResearchContext, Trajectory};
pub use gateway::{ChatRequest, ChatResponse, DecodingParams, Gateway, LlmProvider};
pub use orchestrator::{LoopState, Orchestrator, OrchestratorConfig, RunOutput, RunRecord};
pub use planner::{Planner, PlanEdit, ProgressAssessment, ReflectionDecision, ResearchPlan};
pub use report::{Report, ReportWriter};
pub use search::{RawSearchResult, SearchClient, SearchConfig, SearchQuery};
pub use searcher::{CandidateAnswer, CrossoverConfig, Searcher, SynthesizedAnswer};
