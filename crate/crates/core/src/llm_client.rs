//! Minimal HTTP client for a chat-completion endpoint.
//!
//! The only module that performs network I/O. Fully optional at runtime:
//! every CLI workflow completes on the template/rule paths with this client
//! disabled. The wire format is the common chat-completion JSON shape:
//!
//! request
//! `{"model": ..., "messages": [{"role": "user", "content": ...}],
//!   "temperature": ..., "max_tokens": ...}`
//!
//! response
//! `{"choices": [{"message": {"content": ...}}]}`
//!
//! Credentials come from an environment variable only, never from config
//! files.

pub mod mock;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the API key.
pub const API_KEY_ENV: &str = "QUERYLIFT_LLM_API_KEY";

/// Client settings as they appear in the toolkit config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub max_retries: u32,
    pub max_concurrency: usize,
    /// base backoff between retries, doubled per attempt
    pub backoff_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model_name: "default-model".to_string(),
            temperature: 0.2,
            max_output_tokens: 512,
            max_retries: 3,
            max_concurrency: 4,
            backoff_ms: 200,
        }
    }
}

/// One completion request.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlmRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model_name: String,
}

impl LlmRequest {
    pub fn new(prompt: impl Into<String>, config: &LlmConfig) -> Result<Self, LlmError> {
        let request = Self {
            prompt: prompt.into(),
            temperature: config.temperature,
            max_output_tokens: config.max_output_tokens,
            model_name: config.model_name.clone(),
        };
        request.validate()?;
        Ok(request)
    }

    fn validate(&self) -> Result<(), LlmError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_output_tokens == 0 {
            return Err(LlmError::InvalidRequest(
                "max_output_tokens must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// A raw completion plus observed latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub latency_ms: f64,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("authentication failed (HTTP {status}); not retried")]
    Auth { status: u16 },
    #[error("network error after {attempts} attempt(s): {message}")]
    Network { attempts: u32, message: String },
    #[error("endpoint returned HTTP {status} after {attempts} attempt(s)")]
    Status { status: u16, attempts: u32 },
    #[error("response shape error: {0}")]
    ResponseShape(String),
    #[error("missing API key: set {API_KEY_ENV}")]
    MissingCredentials,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: String,
}

/// Read the API key from the environment.
pub fn credentials_from_env() -> Result<String, LlmError> {
    std::env::var(API_KEY_ENV).map_err(|_| LlmError::MissingCredentials)
}

/// Issue one completion request. Transient failures (transport errors and
/// 5xx/429 statuses) are retried up to `max_retries` extra attempts with
/// exponential backoff; authentication failures are never retried.
pub fn complete(
    request: &LlmRequest,
    endpoint: &str,
    credentials: &str,
    config: &LlmConfig,
) -> Result<LlmResponse, LlmError> {
    request.validate()?;
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(60))
        .build()
        .map_err(|e| LlmError::Network {
            attempts: 0,
            message: e.to_string(),
        })?;

    let body = WireRequest {
        model: &request.model_name,
        messages: vec![WireMessage {
            role: "user",
            content: &request.prompt,
        }],
        temperature: request.temperature,
        max_tokens: request.max_output_tokens,
    };

    let start = Instant::now();
    let total_attempts = config.max_retries + 1;
    let mut last_error: Option<LlmError> = None;
    for attempt in 0..total_attempts {
        if attempt > 0 {
            let factor = 1u64 << (attempt - 1).min(10);
            std::thread::sleep(Duration::from_millis(
                config.backoff_ms.saturating_mul(factor),
            ));
        }
        let sent = client
            .post(endpoint)
            .bearer_auth(credentials)
            .json(&body)
            .send();
        match sent {
            Ok(response) => {
                let status = response.status();
                if status == reqwest::StatusCode::UNAUTHORIZED
                    || status == reqwest::StatusCode::FORBIDDEN
                {
                    return Err(LlmError::Auth {
                        status: status.as_u16(),
                    });
                }
                if status.is_server_error()
                    || status == reqwest::StatusCode::TOO_MANY_REQUESTS
                {
                    last_error = Some(LlmError::Status {
                        status: status.as_u16(),
                        attempts: attempt + 1,
                    });
                    continue;
                }
                if !status.is_success() {
                    return Err(LlmError::Status {
                        status: status.as_u16(),
                        attempts: attempt + 1,
                    });
                }
                let parsed: WireResponse = response
                    .json()
                    .map_err(|e| LlmError::ResponseShape(e.to_string()))?;
                let text = parsed
                    .choices
                    .into_iter()
                    .next()
                    .map(|c| c.message.content)
                    .ok_or_else(|| {
                        LlmError::ResponseShape("response has no choices".to_string())
                    })?;
                return Ok(LlmResponse {
                    text,
                    latency_ms: start.elapsed().as_secs_f64() * 1000.0,
                });
            }
            Err(e) => {
                last_error = Some(LlmError::Network {
                    attempts: attempt + 1,
                    message: e.to_string(),
                });
            }
        }
    }
    Err(last_error.unwrap_or(LlmError::Network {
        attempts: total_attempts,
        message: "no attempts made".to_string(),
    }))
}

/// Complete a batch of prompts with at most `max_concurrency` requests in
/// flight. Results keep input order; each slot is independent.
pub fn complete_batch(
    prompts: &[String],
    endpoint: &str,
    credentials: &str,
    config: &LlmConfig,
) -> Vec<Result<LlmResponse, LlmError>> {
    let concurrency = config.max_concurrency.max(1);
    let mut results: Vec<Option<Result<LlmResponse, LlmError>>> =
        (0..prompts.len()).map(|_| None).collect();
    for chunk_start in (0..prompts.len()).step_by(concurrency) {
        let chunk_end = (chunk_start + concurrency).min(prompts.len());
        std::thread::scope(|scope| {
            let handles: Vec<_> = (chunk_start..chunk_end)
                .map(|i| {
                    let prompt = &prompts[i];
                    scope.spawn(move || {
                        let request = LlmRequest::new(prompt.clone(), config)?;
                        complete(&request, endpoint, credentials, config)
                    })
                })
                .collect();
            for (offset, handle) in handles.into_iter().enumerate() {
                results[chunk_start + offset] = Some(handle.join().expect("worker panicked"));
            }
        });
    }
    results.into_iter().map(|r| r.expect("slot filled")).collect()
}
