//! Provider-agnostic model access: one generic chat-completion request
//! shape, a fixture-backed mock for fully offline runs, knowledge-injected
//! prompt assembly, lexical retrieval grounding, and the
//! verification-feedback-refinement loops.

pub mod explicate;
pub mod prompt;
pub mod provider;
pub mod refine;
pub mod retrieval;

use std::ops::Add;

use serde::{Deserialize, Serialize};

pub use explicate::{explicate, Artifact, ExplicationContext, ExplicationKind, ExplicationOutcome};
pub use prompt::{build_prompt, PromptInputs, PromptTemplate, TemplateId};
pub use provider::{Completer, Completion, HttpProvider, MockProvider, RecordingProvider};
pub use refine::{formalize_with_feedback, judge_and_refine, FormalizeOutcome};
pub use retrieval::{Chunk, RetrievalIndex};

/// Environment variable that hard-disables network access; the HTTP
/// provider refuses to run when it is set. Offline tests assert on this.
pub const FORBID_NETWORK_ENV: &str = "RULEFORGE_FORBID_NETWORK";

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("provider {provider}: request timed out after {seconds}s")]
    Timeout { provider: String, seconds: u64 },
    #[error("provider {provider}: authentication failed (status {status})")]
    Auth { provider: String, status: u16 },
    #[error("provider {provider}: malformed response: {detail}")]
    MalformedResponse { provider: String, detail: String },
    #[error("provider {provider}: transport failure after {attempts} attempt(s): {detail}")]
    Transport { provider: String, attempts: u32, detail: String },
    #[error("provider {provider}: api key environment variable {env} is not set")]
    MissingApiKey { provider: String, env: String },
    #[error("template {template}: no value supplied for placeholder {{{placeholder}}}")]
    MissingPlaceholder { template: String, placeholder: String },
    #[error("network access forbidden by {FORBID_NETWORK_ENV}")]
    NetworkForbidden,
    #[error("all {0} providers failed")]
    AllProvidersFailed(usize),
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
}

/// Connection settings for one provider endpoint. API keys are only ever
/// named by environment variable, never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub api_key_env: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub temperature: f64,
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    2
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.timeout_secs == 0 {
            return Err(GatewayError::InvalidConfig(format!("provider {}: timeout must be > 0", self.name)));
        }
        if self.name.is_empty() {
            return Err(GatewayError::InvalidConfig("provider with empty name".to_string()));
        }
        Ok(())
    }
}

/// Token accounting, additive across calls.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageStats {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub calls: u64,
}

impl Add for UsageStats {
    type Output = UsageStats;
    fn add(self, rhs: UsageStats) -> UsageStats {
        UsageStats {
            prompt_tokens: self.prompt_tokens + rhs.prompt_tokens,
            completion_tokens: self.completion_tokens + rhs.completion_tokens,
            calls: self.calls + rhs.calls,
        }
    }
}

impl UsageStats {
    pub fn accumulate(&mut self, other: &UsageStats) {
        self.prompt_tokens += other.prompt_tokens;
        self.completion_tokens += other.completion_tokens;
        self.calls += other.calls;
    }
}

/// Whitespace token count, the accounting basis for the mock provider.
pub fn approx_token_count(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_is_additive() {
        let a = UsageStats { prompt_tokens: 10, completion_tokens: 5, calls: 1 };
        let b = UsageStats { prompt_tokens: 3, completion_tokens: 2, calls: 1 };
        let sum = a.clone() + b;
        assert_eq!(sum, UsageStats { prompt_tokens: 13, completion_tokens: 7, calls: 2 });
        let mut acc = UsageStats::default();
        acc.accumulate(&a);
        acc.accumulate(&a);
        assert_eq!(acc.calls, 2);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ProviderConfig {
            name: "p".into(),
            endpoint: "http://localhost".into(),
            model: "m".into(),
            api_key_env: String::new(),
            timeout_secs: 30,
            max_retries: 1,
            temperature: 0.0,
        };
        assert!(cfg.validate().is_ok());
        cfg.timeout_secs = 0;
        assert!(cfg.validate().is_err());
    }
}
