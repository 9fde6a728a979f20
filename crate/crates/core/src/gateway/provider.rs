//! Completion providers: a generic chat-completions HTTP client with
//! retry/backoff, and a fixture-directory mock that makes every gateway
//! operation runnable with zero network access.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::{approx_token_count, GatewayError, ProviderConfig, UsageStats, FORBID_NETWORK_ENV};

/// One completion: the text plus this call's token usage (`calls` is 1).
#[derive(Clone, Debug)]
pub struct Completion {
    pub text: String,
    pub usage: UsageStats,
}

pub trait Completer: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<Completion, GatewayError>;
}

// ---------------------------------------------------------------------------
// HTTP provider
// ---------------------------------------------------------------------------

/// Chat-completions-style HTTP provider. The request is the common shape
/// `{model, messages, temperature}`; the response must carry
/// `choices[0].message.content` and, optionally, a `usage` object.
pub struct HttpProvider {
    config: ProviderConfig,
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(HttpProvider { config })
    }

    fn api_key(&self) -> Result<Option<String>, GatewayError> {
        if self.config.api_key_env.is_empty() {
            return Ok(None);
        }
        match std::env::var(&self.config.api_key_env) {
            Ok(key) => Ok(Some(key)),
            Err(_) => Err(GatewayError::MissingApiKey {
                provider: self.config.name.clone(),
                env: self.config.api_key_env.clone(),
            }),
        }
    }

    fn attempt(&self, prompt: &str, key: &Option<String>) -> Result<Completion, GatewayError> {
        let provider = self.config.name.clone();
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(self.config.timeout_secs))
            .build()
            .map_err(|e| GatewayError::Transport { provider: provider.clone(), attempts: 1, detail: e.to_string() })?;
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        });
        let mut request = client.post(&self.config.endpoint).json(&body);
        if let Some(key) = key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| {
            if e.is_timeout() {
                GatewayError::Timeout { provider: provider.clone(), seconds: self.config.timeout_secs }
            } else {
                GatewayError::Transport { provider: provider.clone(), attempts: 1, detail: e.to_string() }
            }
        })?;
        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(GatewayError::Auth { provider, status: status.as_u16() });
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(GatewayError::Transport {
                provider,
                attempts: 1,
                detail: format!("status {status}"),
            });
        }
        let text = response
            .text()
            .map_err(|e| GatewayError::MalformedResponse { provider: provider.clone(), detail: e.to_string() })?;
        if !status.is_success() {
            return Err(GatewayError::MalformedResponse {
                provider,
                detail: format!("status {status}: {}", text.chars().take(200).collect::<String>()),
            });
        }
        let json: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| GatewayError::MalformedResponse { provider: provider.clone(), detail: e.to_string() })?;
        let content = json["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| GatewayError::MalformedResponse {
                provider: provider.clone(),
                detail: "missing choices[0].message.content".to_string(),
            })?
            .to_string();
        if content.is_empty() {
            return Err(GatewayError::MalformedResponse { provider, detail: "empty completion".to_string() });
        }
        let usage = UsageStats {
            prompt_tokens: json["usage"]["prompt_tokens"].as_u64().unwrap_or_else(|| approx_token_count(prompt)),
            completion_tokens: json["usage"]["completion_tokens"]
                .as_u64()
                .unwrap_or_else(|| approx_token_count(&content)),
            calls: 1,
        };
        Ok(Completion { text: content, usage })
    }
}

impl Completer for HttpProvider {
    fn name(&self) -> &str {
        &self.config.name
    }

    /// Retries transient failures (connect errors, 429, 5xx, timeouts) with
    /// exponential backoff, up to the configured retry budget.
    fn complete(&self, prompt: &str) -> Result<Completion, GatewayError> {
        if std::env::var(FORBID_NETWORK_ENV).is_ok() {
            return Err(GatewayError::NetworkForbidden);
        }
        let key = self.api_key()?;
        let mut last: Option<GatewayError> = None;
        let attempts = self.config.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = Duration::from_millis(200u64.saturating_mul(1 << (attempt - 1).min(4)));
                std::thread::sleep(backoff);
            }
            match self.attempt(prompt, &key) {
                Ok(c) => return Ok(c),
                Err(e @ (GatewayError::Transport { .. } | GatewayError::Timeout { .. })) => last = Some(e),
                Err(fatal) => return Err(fatal),
            }
        }
        match last {
            Some(GatewayError::Transport { provider, detail, .. }) => {
                Err(GatewayError::Transport { provider, attempts, detail })
            }
            Some(other) => Err(other),
            None => unreachable!("at least one attempt runs"),
        }
    }
}

// ---------------------------------------------------------------------------
// Mock provider
// ---------------------------------------------------------------------------

/// Fixture-directory provider. A completion is looked up first by prompt
/// fingerprint (`<first 16 hex of sha256>.txt`), then by ordinal sequence
/// (`000.txt`, `001.txt`, ...). Token usage is whitespace-counted.
pub struct MockProvider {
    name: String,
    dir: PathBuf,
    cursor: AtomicUsize,
}

impl MockProvider {
    pub fn new(name: &str, dir: impl Into<PathBuf>) -> Self {
        MockProvider { name: name.to_string(), dir: dir.into(), cursor: AtomicUsize::new(0) }
    }

    pub fn fingerprint(prompt: &str) -> String {
        let digest = Sha256::digest(prompt.as_bytes());
        hex_prefix(&digest, 16)
    }
}

fn hex_prefix(bytes: &[u8], len: usize) -> String {
    let mut s = String::with_capacity(len);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= len {
            break;
        }
    }
    s.truncate(len);
    s
}

impl Completer for MockProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &str) -> Result<Completion, GatewayError> {
        let by_fingerprint = self.dir.join(format!("{}.txt", Self::fingerprint(prompt)));
        let path = if by_fingerprint.exists() {
            by_fingerprint
        } else {
            let ordinal = self.cursor.fetch_add(1, Ordering::SeqCst);
            self.dir.join(format!("{ordinal:03}.txt"))
        };
        let text = std::fs::read_to_string(&path).map_err(|_| GatewayError::Transport {
            provider: self.name.clone(),
            attempts: 1,
            detail: format!("mock fixture missing: {}", path.display()),
        })?;
        let usage = UsageStats {
            prompt_tokens: approx_token_count(prompt),
            completion_tokens: approx_token_count(&text),
            calls: 1,
        };
        Ok(Completion { text, usage })
    }
}

// ---------------------------------------------------------------------------
// Recording decorator
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, serde::Serialize)]
pub struct CallRecord {
    pub provider: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Wraps a provider and records one entry per completion call; the pipeline
/// audits its manifest totals against this log.
pub struct RecordingProvider<C> {
    inner: C,
    log: Mutex<Vec<CallRecord>>,
}

impl<C: Completer> RecordingProvider<C> {
    pub fn new(inner: C) -> Self {
        RecordingProvider { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn records(&self) -> Vec<CallRecord> {
        self.log.lock().expect("record log lock").clone()
    }
}

impl<C: Completer> Completer for RecordingProvider<C> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, prompt: &str) -> Result<Completion, GatewayError> {
        let completion = self.inner.complete(prompt)?;
        self.log.lock().expect("record log lock").push(CallRecord {
            provider: self.inner.name().to_string(),
            prompt_tokens: completion.usage.prompt_tokens,
            completion_tokens: completion.usage.completion_tokens,
        });
        Ok(completion)
    }
}

/// Scripted in-memory provider for tests: yields the given completions in
/// order, then errors.
pub struct ScriptedProvider {
    name: String,
    responses: Vec<String>,
    cursor: AtomicUsize,
}

impl ScriptedProvider {
    pub fn new(name: &str, responses: Vec<String>) -> Self {
        ScriptedProvider { name: name.to_string(), responses, cursor: AtomicUsize::new(0) }
    }

    pub fn calls_made(&self) -> usize {
        self.cursor.load(Ordering::SeqCst).min(self.responses.len())
    }
}

impl Completer for ScriptedProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &str) -> Result<Completion, GatewayError> {
        let i = self.cursor.fetch_add(1, Ordering::SeqCst);
        match self.responses.get(i) {
            Some(text) => Ok(Completion {
                text: text.clone(),
                usage: UsageStats {
                    prompt_tokens: approx_token_count(prompt),
                    completion_tokens: approx_token_count(text),
                    calls: 1,
                },
            }),
            None => Err(GatewayError::Transport {
                provider: self.name.clone(),
                attempts: 1,
                detail: "script exhausted".to_string(),
            }),
        }
    }
}
