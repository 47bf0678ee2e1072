//! Live backend speaking the Tavily-style search API.
//!
//! `POST {base_url}/search` with `{"api_key", "query", "max_results"}`,
//! answered by `{"results": [{"url", "title", "content", "score"}]}`.
//! Backends that report percentage scores (values in `(1, 100]`) are
//! normalized to `[0, 1]` at this boundary.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{RawSearchResult, SearchBackend, SearchError};

#[derive(Debug, Clone)]
pub struct TavilyConfig {
    pub base_url: String,
    pub api_key: String,
    pub timeout: Duration,
    /// Upper bound passed to the service; the client caps again locally.
    pub fetch_count: usize,
}

impl TavilyConfig {
    pub fn new(api_key: impl Into<String>) -> Self {
        TavilyConfig {
            base_url: "https://api.tavily.com".into(),
            api_key: api_key.into(),
            timeout: Duration::from_secs(60),
            fetch_count: 10,
        }
    }
}

pub struct TavilyBackend {
    config: TavilyConfig,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    api_key: &'a str,
    query: &'a str,
    max_results: usize,
}

#[derive(Deserialize)]
struct WireResponse {
    results: Vec<WireResult>,
}

#[derive(Deserialize)]
struct WireResult {
    url: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    content: String,
    score: f64,
}

impl TavilyBackend {
    pub fn new(config: TavilyConfig) -> Result<Self, SearchError> {
        if config.api_key.trim().is_empty() {
            return Err(SearchError::InvalidConfig("search API key is empty".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| SearchError::Transport(format!("cannot build HTTP client: {e}")))?;
        Ok(TavilyBackend { config, client })
    }
}

/// Map a provider score onto `[0, 1]`: percentage-style values in `(1, 100]`
/// are divided by 100; anything else is passed through for validation.
fn normalize_score(score: f64) -> f64 {
    if score > 1.0 && score <= 100.0 {
        score / 100.0
    } else {
        score
    }
}

impl SearchBackend for TavilyBackend {
    fn fetch(&self, query_text: &str) -> Result<Vec<RawSearchResult>, SearchError> {
        let url = format!("{}/search", self.config.base_url.trim_end_matches('/'));
        let body = WireRequest {
            api_key: &self.config.api_key,
            query: query_text,
            max_results: self.config.fetch_count,
        };
        let response = self
            .client
            .post(&url)
            .json(&body)
            .send()
            .map_err(|e| SearchError::Transport(format!("search request failed: {e}")))?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(SearchError::Transport(format!(
                "search endpoint returned {status}: {}",
                text.chars().take(300).collect::<String>()
            )));
        }
        let wire: WireResponse = response
            .json()
            .map_err(|e| SearchError::Transport(format!("malformed search response: {e}")))?;
        Ok(wire
            .results
            .into_iter()
            .map(|r| RawSearchResult {
                url: r.url,
                title: r.title,
                content: r.content,
                score: normalize_score(r.score),
            })
            .collect())
    }

    fn id(&self) -> &str {
        "tavily"
    }
}
