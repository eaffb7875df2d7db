//! LLM prompting: templates, a cached retrying completion client, and the
//! corpus-level overcorrection pass.

mod cache;
mod client;
mod prompt;
mod provider;

pub use cache::{cache_key, CacheEntry, ResponseCache};
pub use client::{overcorrect_corpus, Backoff, CompletionClient, Overcorrection, OvercorrectionSettings};
pub use prompt::{
    overcorrect_prompt, parse_output, post_correct_prompt, PromptTemplate, TemplateId, INPUT_KEY,
    OVERCORRECTED_KEY, SOURCE_KEY, UNDERCORRECTED_KEY,
};
pub use provider::{
    extract_prompt_input, CompletionProvider, CompletionRequest, HttpProvider, MockProvider,
    ProviderFailure, ProviderResponse, API_KEY_ENV, DEFAULT_TEMPERATURE,
};

use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("missing binding for placeholder {0}")]
    MissingBinding(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("provider failed after {attempts} attempts: {message}")]
    Provider { attempts: u32, message: String },
    #[error("rate limited after {attempts} attempts (retry after {retry_after:?})")]
    RateLimited {
        attempts: u32,
        retry_after: Option<Duration>,
    },
    #[error("provider rejected the request: {0}")]
    Rejected(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
