use std::sync::Arc;
use std::time::Duration;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{cache_key, ResponseCache};
use super::prompt::{overcorrect_prompt, parse_output};
use super::provider::{
    CompletionProvider, CompletionRequest, ProviderFailure, ProviderResponse, DEFAULT_TEMPERATURE,
};
use super::LlmError;

/// Exponential backoff: `base * factor^(attempt-1)`, capped, then stretched
/// by up to `jitter` (a fraction) at random.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backoff {
    pub base: Duration,
    pub factor: f64,
    pub max_delay: Duration,
    pub jitter: f64,
}

impl Default for Backoff {
    fn default() -> Self {
        Self {
            base: Duration::from_secs(1),
            factor: 2.0,
            max_delay: Duration::from_secs(60),
            jitter: 0.25,
        }
    }
}

impl Backoff {
    pub fn none() -> Self {
        Self {
            base: Duration::ZERO,
            jitter: 0.0,
            ..Self::default()
        }
    }

    /// Delay after the `attempt`-th failure (1-based), before jitter.
    pub fn nominal_delay(&self, attempt: u32) -> Duration {
        let scaled = self.base.as_secs_f64() * self.factor.powi(attempt.saturating_sub(1) as i32);
        Duration::from_secs_f64(scaled.min(self.max_delay.as_secs_f64()))
    }

    fn delay(&self, attempt: u32) -> Duration {
        let nominal = self.nominal_delay(attempt);
        if self.jitter <= 0.0 || nominal.is_zero() {
            return nominal;
        }
        let stretch = 1.0 + rand::rng().random_range(0.0..self.jitter);
        nominal.mul_f64(stretch)
    }
}

type Sleeper = dyn Fn(Duration) + Send + Sync;

/// Provider wrapper adding a replay cache and retries.
pub struct CompletionClient {
    provider: Arc<dyn CompletionProvider>,
    cache: Option<Arc<ResponseCache>>,
    backoff: Backoff,
    sleeper: Box<Sleeper>,
}

impl CompletionClient {
    pub fn new(provider: Arc<dyn CompletionProvider>) -> Self {
        Self {
            provider,
            cache: None,
            backoff: Backoff::default(),
            sleeper: Box::new(std::thread::sleep),
        }
    }

    pub fn with_cache(mut self, cache: Arc<ResponseCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_backoff(mut self, backoff: Backoff) -> Self {
        self.backoff = backoff;
        self
    }

    /// Replace `thread::sleep`, e.g. to record delays in tests.
    pub fn with_sleeper<F: Fn(Duration) + Send + Sync + 'static>(mut self, sleeper: F) -> Self {
        self.sleeper = Box::new(sleeper);
        self
    }

    pub fn cache(&self) -> Option<&ResponseCache> {
        self.cache.as_deref()
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<ProviderResponse, LlmError> {
        if request.max_attempts == 0 {
            return Err(LlmError::InvalidRequest("max_attempts must be at least 1".into()));
        }
        if !(request.temperature >= 0.0 && request.temperature.is_finite()) {
            return Err(LlmError::InvalidRequest(format!(
                "temperature {} must be non-negative",
                request.temperature
            )));
        }

        let key = cache_key(&request.model, &request.prompt, request.temperature);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            let mut response = ProviderResponse::text(hit.raw_text);
            response.provider_meta.insert("cache".into(), "hit".into());
            return Ok(response);
        }

        let mut last_failure = None;
        for attempt in 1..=request.max_attempts {
            match self.provider.complete(request) {
                Ok(response) => {
                    if let Some(cache) = &self.cache {
                        cache.insert(
                            &request.model,
                            &request.prompt,
                            request.temperature,
                            &response.raw_text,
                        )?;
                    }
                    return Ok(response);
                }
                Err(ProviderFailure::Rejected(message)) => return Err(LlmError::Rejected(message)),
                Err(failure) => {
                    log::debug!("attempt {attempt}/{} failed: {failure}", request.max_attempts);
                    if attempt < request.max_attempts {
                        let mut delay = self.backoff.delay(attempt);
                        if let ProviderFailure::RateLimited {
                            retry_after: Some(wait),
                        } = &failure
                        {
                            delay = delay.max(*wait);
                        }
                        (self.sleeper)(delay);
                    }
                    last_failure = Some(failure);
                }
            }
        }

        let attempts = request.max_attempts;
        Err(match last_failure.expect("at least one attempt ran") {
            ProviderFailure::RateLimited { retry_after } => LlmError::RateLimited {
                attempts,
                retry_after,
            },
            other => LlmError::Provider {
                attempts,
                message: other.to_string(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvercorrectionSettings {
    pub model: String,
    pub temperature: f64,
    pub max_attempts: u32,
    pub max_in_flight: usize,
}

impl Default for OvercorrectionSettings {
    fn default() -> Self {
        Self {
            model: "gpt-3.5-turbo-0125".into(),
            temperature: DEFAULT_TEMPERATURE,
            max_attempts: 5,
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overcorrection {
    pub source: String,
    pub overcorrected: String,
    /// Set when the provider failed and the source was kept as its own correction.
    pub failure: Option<String>,
}

/// Run the overcorrection prompt over every source, in input order.
///
/// A failed record keeps its source as the correction; the stream never aborts.
pub fn overcorrect_corpus(
    sources: &[String],
    settings: &OvercorrectionSettings,
    client: &CompletionClient,
) -> Vec<Overcorrection> {
    let run_one = |(idx, source): (usize, &String)| {
        let request = CompletionRequest {
            model: settings.model.clone(),
            prompt: overcorrect_prompt(source),
            temperature: settings.temperature,
            max_attempts: settings.max_attempts,
        };
        match client.complete(&request) {
            Ok(response) => {
                log::debug!("record {idx}: ok");
                Overcorrection {
                    source: source.clone(),
                    overcorrected: parse_output(&response.raw_text, source),
                    failure: None,
                }
            }
            Err(err) => {
                log::warn!("record {idx}: {err}; keeping the source");
                Overcorrection {
                    source: source.clone(),
                    overcorrected: source.clone(),
                    failure: Some(err.to_string()),
                }
            }
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.max_in_flight.max(1))
        .build()
        .expect("thread pool builds");
    let out: Vec<Overcorrection> =
        pool.install(|| sources.par_iter().enumerate().map(run_one).collect());
    log::info!(
        "overcorrected {} records, {} failures",
        out.len(),
        out.iter().filter(|o| o.failure.is_some()).count()
    );
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;
    use crate::llm::provider::MockProvider;

    fn client(provider: Arc<MockProvider>) -> CompletionClient {
        CompletionClient::new(provider).with_backoff(Backoff::none())
    }

    #[test]
    fn backoff_schedule() {
        let b = Backoff::default();
        assert_eq!(b.nominal_delay(1), Duration::from_secs(1));
        assert_eq!(b.nominal_delay(2), Duration::from_secs(2));
        assert_eq!(b.nominal_delay(3), Duration::from_secs(4));
        assert_eq!(b.nominal_delay(20), Duration::from_secs(60));
        for attempt in 1..5 {
            let d = b.delay(attempt);
            let n = b.nominal_delay(attempt);
            assert!(d >= n && d <= n.mul_f64(1.25));
        }
    }

    #[test]
    fn cache_hit_skips_provider() {
        let provider = Arc::new(MockProvider::fixed("<output> A </output>"));
        let c = client(provider.clone()).with_cache(Arc::new(ResponseCache::in_memory()));
        let req = CompletionRequest::new("m", "p");
        let first = c.complete(&req).unwrap();
        for _ in 0..5 {
            assert_eq!(c.complete(&req).unwrap().raw_text, first.raw_text);
        }
        assert_eq!(provider.calls(), 1);
    }

    #[test]
    fn retries_until_success() {
        let provider = Arc::new(MockProvider::failing_then(2, "done"));
        let delays = Arc::new(Mutex::new(Vec::new()));
        let recorded = delays.clone();
        let c = CompletionClient::new(provider.clone())
            .with_backoff(Backoff {
                jitter: 0.0,
                ..Backoff::default()
            })
            .with_sleeper(move |d| recorded.lock().unwrap().push(d));
        let resp = c.complete(&CompletionRequest::new("m", "p").with_max_attempts(3)).unwrap();
        assert_eq!(resp.raw_text, "done");
        assert_eq!(provider.calls(), 3);
        assert_eq!(
            *delays.lock().unwrap(),
            vec![Duration::from_secs(1), Duration::from_secs(2)]
        );
    }

    #[test]
    fn gives_up_after_max_attempts() {
        let provider = Arc::new(MockProvider::failing_then(usize::MAX, "never"));
        let err = client(provider.clone())
            .complete(&CompletionRequest::new("m", "p").with_max_attempts(2))
            .unwrap_err();
        assert!(matches!(err, LlmError::Provider { attempts: 2, .. }), "{err:?}");
        assert_eq!(provider.calls(), 2);
    }

    #[test]
    fn rate_limit_surfaces_retry_after() {
        let provider = Arc::new(MockProvider::from_fn(|_, _| {
            Err(ProviderFailure::RateLimited {
                retry_after: Some(Duration::from_secs(7)),
            })
        }));
        let delays = Arc::new(Mutex::new(Vec::new()));
        let recorded = delays.clone();
        let err = client(provider)
            .with_sleeper(move |d| recorded.lock().unwrap().push(d))
            .complete(&CompletionRequest::new("m", "p").with_max_attempts(2))
            .unwrap_err();
        assert!(
            matches!(err, LlmError::RateLimited { attempts: 2, retry_after: Some(d) } if d == Duration::from_secs(7)),
            "{err:?}"
        );
        assert_eq!(*delays.lock().unwrap(), vec![Duration::from_secs(7)]);
    }

    #[test]
    fn rejection_is_not_retried() {
        let provider = Arc::new(MockProvider::from_fn(|_, _| {
            Err(ProviderFailure::Rejected("bad model".into()))
        }));
        let err = client(provider.clone())
            .complete(&CompletionRequest::new("m", "p").with_max_attempts(5))
            .unwrap_err();
        assert!(matches!(err, LlmError::Rejected(_)));
        assert_eq!(provider.calls(), 1);
    }

    #[test]
    fn invalid_requests() {
        let c = client(Arc::new(MockProvider::echo()));
        assert!(c.complete(&CompletionRequest::new("m", "p").with_max_attempts(0)).is_err());
        assert!(c.complete(&CompletionRequest::new("m", "p").with_temperature(-1.0)).is_err());
    }

    #[test]
    fn corpus_uses_mock_output() {
        let c = client(Arc::new(MockProvider::fixed("<output> FIXED </output>")));
        let sources: Vec<String> = (0..10).map(|i| format!("s {i}")).collect();
        let out = overcorrect_corpus(&sources, &OvercorrectionSettings::default(), &c);
        assert_eq!(out.len(), 10);
        assert!(out.iter().all(|o| o.overcorrected == "FIXED" && o.failure.is_none()));
        assert!(out.iter().zip(&sources).all(|(o, s)| &o.source == s));
    }

    #[test]
    fn corpus_failure_falls_back_to_source() {
        let provider = MockProvider::from_fn(|_, req| {
            if req.prompt.contains("<input> bad </input>") {
                Err(ProviderFailure::Transient("boom".into()))
            } else {
                Ok("<output> good </output>".into())
            }
        });
        let c = client(Arc::new(provider));
        let sources = vec!["one".to_string(), "bad".to_string(), "three".to_string()];
        let out = overcorrect_corpus(&sources, &OvercorrectionSettings::default(), &c);
        assert_eq!(out[0].overcorrected, "good");
        assert_eq!(out[1].overcorrected, "bad");
        assert!(out[1].failure.is_some());
        assert_eq!(out[2].overcorrected, "good");
    }

    #[test]
    fn corpus_empty() {
        let c = client(Arc::new(MockProvider::echo()));
        assert!(overcorrect_corpus(&[], &OvercorrectionSettings::default(), &c).is_empty());
    }

    #[test]
    fn corpus_order_is_stable_under_parallelism() {
        let c = client(Arc::new(MockProvider::rewriting(|s| s.to_uppercase())));
        let sources: Vec<String> = (0..200).map(|i| format!("sentence number {i}")).collect();
        let settings = OvercorrectionSettings {
            max_in_flight: 8,
            ..Default::default()
        };
        let out = overcorrect_corpus(&sources, &settings, &c);
        for (o, s) in out.iter().zip(&sources) {
            assert_eq!(o.overcorrected, s.to_uppercase());
        }
    }
}
