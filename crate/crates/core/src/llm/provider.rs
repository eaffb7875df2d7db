//! Completion providers: the trait, an OpenAI-compatible HTTP client and
//! deterministic mocks.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TEMPERATURE: f64 = 1.0;
pub const API_KEY_ENV: &str = "POCO_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_attempts: u32,
}

impl CompletionRequest {
    pub fn new(model: impl Into<String>, prompt: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            prompt: prompt.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_attempts: 3,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_max_attempts(mut self, max_attempts: u32) -> Self {
        self.max_attempts = max_attempts;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProviderResponse {
    pub raw_text: String,
    pub provider_meta: BTreeMap<String, String>,
}

impl ProviderResponse {
    pub fn text(raw_text: impl Into<String>) -> Self {
        Self {
            raw_text: raw_text.into(),
            provider_meta: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderFailure {
    /// Worth retrying: network errors, server errors, timeouts.
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("rate limited (retry after {retry_after:?})")]
    RateLimited { retry_after: Option<Duration> },
    /// The request itself is bad; retrying will not help.
    #[error("request rejected: {0}")]
    Rejected(String),
}

/// A single-method completion backend.
pub trait CompletionProvider: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<ProviderResponse, ProviderFailure>;
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for std::sync::Arc<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<ProviderResponse, ProviderFailure> {
        (**self).complete(request)
    }
}

/// OpenAI-compatible `chat/completions` endpoint.
pub struct HttpProvider {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .expect("http client builds");
        Self {
            endpoint: endpoint.into(),
            api_key,
            client,
        }
    }

    /// Reads the API key from `POCO_API_KEY`.
    pub fn from_env(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self::new(endpoint, std::env::var(API_KEY_ENV).ok(), timeout)
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    id: Option<String>,
    model: Option<String>,
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

impl CompletionProvider for HttpProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<ProviderResponse, ProviderFailure> {
        let body = serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        });
        let mut call = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let response = call
            .send()
            .map_err(|e| ProviderFailure::Transient(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 429 {
            let retry_after = response
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<f64>().ok())
                .map(Duration::from_secs_f64);
            return Err(ProviderFailure::RateLimited { retry_after });
        }
        if status.is_server_error() {
            return Err(ProviderFailure::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(ProviderFailure::Rejected(format!("HTTP {status}: {text}")));
        }

        let parsed: ChatResponse = response
            .json()
            .map_err(|e| ProviderFailure::Transient(format!("bad response body: {e}")))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| ProviderFailure::Transient("response has no choices".into()))?;

        let mut meta = BTreeMap::new();
        meta.extend(parsed.id.map(|v| ("id".to_owned(), v)));
        meta.extend(parsed.model.map(|v| ("model".to_owned(), v)));
        meta.extend(choice.finish_reason.map(|v| ("finish_reason".to_owned(), v)));
        Ok(ProviderResponse {
            raw_text: choice.message.content.unwrap_or_default(),
            provider_meta: meta,
        })
    }
}

/// The sentence between the last `<input>` and `</input>` of a prompt.
pub fn extract_prompt_input(prompt: &str) -> Option<&str> {
    let open = prompt.rfind("<input>")? + "<input>".len();
    let close = prompt[open..].find("</input>")? + open;
    Some(prompt[open..close].trim())
}

type Responder = dyn Fn(usize, &CompletionRequest) -> Result<String, ProviderFailure> + Send + Sync;

/// Deterministic in-process provider for tests and dry runs.
pub struct MockProvider {
    respond: Box<Responder>,
    calls: AtomicUsize,
}

impl MockProvider {
    /// `respond` receives the zero-based call number and the request.
    pub fn from_fn<F>(respond: F) -> Self
    where
        F: Fn(usize, &CompletionRequest) -> Result<String, ProviderFailure> + Send + Sync + 'static,
    {
        Self {
            respond: Box::new(respond),
            calls: AtomicUsize::new(0),
        }
    }

    /// Answers `<output> S </output>` where S is the prompt's input sentence
    /// passed through `rewrite`.
    pub fn rewriting<F>(rewrite: F) -> Self
    where
        F: Fn(&str) -> String + Send + Sync + 'static,
    {
        Self::from_fn(move |_, req| {
            let input = extract_prompt_input(&req.prompt).unwrap_or(req.prompt.as_str());
            Ok(format!("<output> {} </output>", rewrite(input)))
        })
    }

    pub fn echo() -> Self {
        Self::rewriting(str::to_owned)
    }

    pub fn fixed(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::from_fn(move |_, _| Ok(text.clone()))
    }

    /// Fails the first `failures` calls, then answers `text`.
    pub fn failing_then(failures: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        Self::from_fn(move |call, _| {
            if call < failures {
                Err(ProviderFailure::Transient(format!("simulated failure {}", call + 1)))
            } else {
                Ok(text.clone())
            }
        })
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl CompletionProvider for MockProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<ProviderResponse, ProviderFailure> {
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        (self.respond)(call, request).map(ProviderResponse::text)
    }
}
