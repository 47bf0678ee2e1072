//! Pass-through provider that records every request it forwards.
//!
//! Tests wrap a scripted provider in a [`RecordingProvider`] to assert on
//! exactly what was sent — decoding parameters, prompts, tags — without
//! changing behavior.

use std::sync::{Arc, Mutex};

use super::{ChatRequest, ChatResponse, LlmProvider, ProviderError};

pub struct RecordingProvider {
    inner: Arc<dyn LlmProvider>,
    requests: Mutex<Vec<ChatRequest>>,
}

impl RecordingProvider {
    pub fn new(inner: Arc<dyn LlmProvider>) -> Arc<Self> {
        Arc::new(RecordingProvider { inner, requests: Mutex::new(Vec::new()) })
    }

    /// Snapshot of every request forwarded so far, in call order.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().expect("recording state poisoned").clone()
    }
}

impl LlmProvider for RecordingProvider {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        self.requests.lock().expect("recording state poisoned").push(request.clone());
        self.inner.complete(request)
    }

    fn id(&self) -> &str {
        self.inner.id()
    }

    fn supports_top_k(&self) -> bool {
        self.inner.supports_top_k()
    }
}
