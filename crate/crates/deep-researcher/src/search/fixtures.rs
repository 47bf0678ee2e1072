//! File-backed search fixtures for fully offline runs.
//!
//! A fixture directory holds one JSON file per recorded query. Files are
//! named by a hash of the normalized query text (so arbitrary queries map to
//! valid filenames) and carry the original query for human inspection:
//!
//! ```json
//! {
//!   "query": "GaN transistor efficiency",
//!   "results": [ {"url": "...", "title": "...", "content": "...", "score": 0.84} ]
//! }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{RawSearchResult, SearchBackend, SearchError};
use crate::context::normalize_query;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FixtureFile {
    query: String,
    results: Vec<RawSearchResult>,
}

/// Read-only store of recorded query→results files.
pub struct FixtureStore {
    entries: BTreeMap<String, Vec<RawSearchResult>>,
    dir: PathBuf,
}

impl FixtureStore {
    /// Load every `*.json` fixture in the directory. Malformed files fail
    /// loudly — a bad fixture is a test bug, not a runtime condition.
    pub fn load(dir: &Path) -> Result<Self, SearchError> {
        let mut entries = BTreeMap::new();
        let listing = fs::read_dir(dir).map_err(|e| {
            SearchError::Transport(format!("cannot read fixture dir {}: {e}", dir.display()))
        })?;
        for item in listing {
            let path = item
                .map_err(|e| SearchError::Transport(format!("fixture dir entry: {e}")))?
                .path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| {
                SearchError::Transport(format!("cannot read {}: {e}", path.display()))
            })?;
            let fixture: FixtureFile = serde_json::from_str(&text).map_err(|e| {
                SearchError::InvalidResult(format!("malformed fixture {}: {e}", path.display()))
            })?;
            for r in &fixture.results {
                r.validate()?;
            }
            entries.insert(normalize_query(&fixture.query), fixture.results);
        }
        Ok(FixtureStore { entries, dir: dir.to_path_buf() })
    }

    /// Record a fixture file for `query` into `dir` (builder for tests and
    /// for capturing live sessions).
    pub fn record(
        dir: &Path,
        query: &str,
        results: &[RawSearchResult],
    ) -> Result<PathBuf, SearchError> {
        fs::create_dir_all(dir).map_err(|e| {
            SearchError::Transport(format!("cannot create fixture dir {}: {e}", dir.display()))
        })?;
        let path = dir.join(format!("{}.json", fixture_stem(query)));
        let fixture =
            FixtureFile { query: query.to_string(), results: results.to_vec() };
        let json = serde_json::to_string_pretty(&fixture)
            .map_err(|e| SearchError::InvalidResult(format!("fixture serialization: {e}")))?;
        fs::write(&path, json).map_err(|e| {
            SearchError::Transport(format!("cannot write {}: {e}", path.display()))
        })?;
        Ok(path)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Filesystem-safe stem for a query: truncated hash of the normalized text.
fn fixture_stem(query: &str) -> String {
    let digest = Sha256::digest(normalize_query(query).as_bytes());
    digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
}

impl SearchBackend for FixtureStore {
    fn fetch(&self, query_text: &str) -> Result<Vec<RawSearchResult>, SearchError> {
        self.entries
            .get(&normalize_query(query_text))
            .cloned()
            .ok_or_else(|| {
                SearchError::FixtureMiss(format!(
                    "{query_text} (fixture dir {})",
                    self.dir.display()
                ))
            })
    }

    fn id(&self) -> &str {
        "fixtures"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::result;

    #[test]
    fn record_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let results = vec![
            result("https://a", "A", "alpha", 0.8),
            result("https://b", "B", "beta", 0.4),
        ];
        FixtureStore::record(dir.path(), "Solar PV Costs 2024", &results).unwrap();
        let store = FixtureStore::load(dir.path()).unwrap();
        assert_eq!(store.len(), 1);
        // Lookup is normalization-tolerant.
        let fetched = store.fetch("solar pv costs   2024").unwrap();
        assert_eq!(fetched, results);
    }

    #[test]
    fn miss_names_the_query_and_dir() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::load(dir.path()).unwrap();
        let err = store.fetch("nothing here").unwrap_err();
        match err {
            SearchError::FixtureMiss(msg) => assert!(msg.contains("nothing here")),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn malformed_fixture_fails_load() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
        assert!(FixtureStore::load(dir.path()).is_err());
    }

    #[test]
    fn non_json_files_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("README.md"), "notes").unwrap();
        let store = FixtureStore::load(dir.path()).unwrap();
        assert!(store.is_empty());
    }
}
