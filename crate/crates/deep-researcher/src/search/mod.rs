//! Web-search abstraction with result capping and relevance filtering.
//!
//! A [`SearchClient`] wraps any [`SearchBackend`] — live HTTP service,
//! recorded fixtures, or an in-memory map — and applies the retrieval
//! policy: keep the top `max_results` by descending score, then (as a
//! separate, later step owned by the caller) drop results scoring below the
//! relevance threshold via [`filter_by_score`].

mod fixtures;
mod live;

pub use fixtures::FixtureStore;
pub use live::{TavilyBackend, TavilyConfig};

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::normalize_query;

/// A query issued by the search agent, tied to its position in the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub text: String,
    /// Why the agent chose this query.
    pub rationale: String,
    /// Plan step this query serves, when the agent named one.
    pub plan_step_ref: Option<String>,
    pub seq_no: u64,
}

impl SearchQuery {
    pub fn new(text: impl Into<String>, seq_no: u64) -> Self {
        SearchQuery {
            text: text.into(),
            rationale: String::new(),
            plan_step_ref: None,
            seq_no,
        }
    }
}

/// One scored search hit as returned by a backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSearchResult {
    pub url: String,
    pub title: String,
    /// Content excerpt from the result page.
    pub content: String,
    /// Normalized relevance in `[0.0, 1.0]`.
    pub score: f64,
}

impl RawSearchResult {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.url.trim().is_empty() {
            return Err(SearchError::InvalidResult("result url is empty".into()));
        }
        if !(0.0..=1.0).contains(&self.score) || !self.score.is_finite() {
            return Err(SearchError::InvalidResult(format!(
                "score {} for {} outside [0, 1]",
                self.score, self.url
            )));
        }
        Ok(())
    }
}

/// Retrieval policy knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Cap on results returned per query, highest scores first.
    pub max_results: usize,
    /// Results scoring below this are dropped after capping.
    pub score_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_results: 5, score_threshold: 0.30 }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.max_results < 1 {
            return Err(SearchError::InvalidConfig("max_results must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.score_threshold) || !self.score_threshold.is_finite() {
            return Err(SearchError::InvalidConfig(format!(
                "score_threshold {} outside [0, 1]",
                self.score_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search transport failure: {0}")]
    Transport(String),
    #[error("no fixture recorded for query `{0}`")]
    FixtureMiss(String),
    #[error("invalid search result: {0}")]
    InvalidResult(String),
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
}

/// A source of raw, uncapped, unfiltered search results.
pub trait SearchBackend: Send + Sync {
    fn fetch(&self, query_text: &str) -> Result<Vec<RawSearchResult>, SearchError>;

    fn id(&self) -> &str;
}

/// Keep exactly the results scoring at or above `threshold`, preserving
/// order. Pure; the boundary case (score == threshold) is kept because only
/// strict inferiors are dropped.
pub fn filter_by_score(results: &[RawSearchResult], threshold: f64) -> Vec<RawSearchResult> {
    results.iter().filter(|r| r.score >= threshold).cloned().collect()
}

/// Backend wrapper applying the top-N cap.
pub struct SearchClient {
    backend: Box<dyn SearchBackend>,
}

impl SearchClient {
    pub fn new(backend: Box<dyn SearchBackend>) -> Self {
        SearchClient { backend }
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    /// Fetch results for the query and keep the `config.max_results` highest
    /// scores, ordered by descending score (ties keep backend order). The
    /// relevance threshold is NOT applied here; callers filter afterwards so
    /// the two policies stay independently testable.
    pub fn search(
        &self,
        query: &SearchQuery,
        config: &SearchConfig,
    ) -> Result<Vec<RawSearchResult>, SearchError> {
        config.validate()?;
        let mut results = self.backend.fetch(&query.text)?;
        for r in &results {
            r.validate()?;
        }
        // Stable sort: equal scores keep the backend's order.
        results.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("scores are finite"));
        results.truncate(config.max_results);
        Ok(results)
    }
}

/// Map-backed backend for tests and examples. Keys are normalized query
/// text, so lookups tolerate case and spacing differences.
pub struct InMemoryBackend {
    responses: Mutex<BTreeMap<String, Vec<RawSearchResult>>>,
    /// Served when no key matches; `None` makes misses an error.
    default: Option<Vec<RawSearchResult>>,
}

impl InMemoryBackend {
    pub fn new() -> Self {
        InMemoryBackend { responses: Mutex::new(BTreeMap::new()), default: None }
    }

    /// Backend that answers every unknown query with the same result set —
    /// convenient for randomized orchestrator tests.
    pub fn with_default(results: Vec<RawSearchResult>) -> Self {
        InMemoryBackend { responses: Mutex::new(BTreeMap::new()), default: Some(results) }
    }

    pub fn insert(&self, query_text: &str, results: Vec<RawSearchResult>) {
        self.responses
            .lock()
            .expect("backend map poisoned")
            .insert(normalize_query(query_text), results);
    }
}

impl Default for InMemoryBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchBackend for InMemoryBackend {
    fn fetch(&self, query_text: &str) -> Result<Vec<RawSearchResult>, SearchError> {
        let map = self.responses.lock().expect("backend map poisoned");
        if let Some(results) = map.get(&normalize_query(query_text)) {
            return Ok(results.clone());
        }
        match &self.default {
            Some(results) => Ok(results.clone()),
            None => Err(SearchError::FixtureMiss(query_text.to_string())),
        }
    }

    fn id(&self) -> &str {
        "in-memory"
    }
}

/// Convenience constructor for tests and fixtures.
pub fn result(url: &str, title: &str, content: &str, score: f64) -> RawSearchResult {
    RawSearchResult {
        url: url.to_string(),
        title: title.to_string(),
        content: content.to_string(),
        score,
    }
}
