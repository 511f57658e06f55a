//! Remote generator speaking the generic chat-completion HTTP contract.
//!
//! One JSON shape covers the providers we care about: a `messages` list of
//! role/content turns goes in, `choices[0].message.content` comes out.
//! Credentials are read from the environment at construction. The client
//! never exceeds its configured number of in-flight requests and retries
//! transient failures with exponential backoff; callers treat a failed item
//! as skip-and-log, so one bad document never poisons a batch.

use super::{Generator, GeneratorError, GeneratorSpec, Role, Turn};
use serde_json::json;
use std::io::Write;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn new(limit: usize) -> Self {
        InFlight {
            slots: Mutex::new(limit.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut slots = self.slots.lock().unwrap();
        while *slots == 0 {
            slots = self.freed.wait(slots).unwrap();
        }
        *slots -= 1;
    }

    fn release(&self) {
        *self.slots.lock().unwrap() += 1;
        self.freed.notify_one();
    }
}

#[derive(Debug)]
pub struct RemoteGenerator {
    name: String,
    endpoint: String,
    api_key: String,
    temperature: f64,
    max_tokens: u32,
    retry_budget: usize,
    backoff_base: Duration,
    in_flight: InFlight,
    audit: Option<Mutex<std::fs::File>>,
}

impl RemoteGenerator {
    /// Build a client from a `GeneratorSpec`, reading the API key from
    /// the environment variable it names.
    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self, GeneratorError> {
        let env_name = spec
            .api_key_env
            .clone()
            .unwrap_or_else(|| "GENERATOR_API_KEY".to_string());
        let api_key = std::env::var(&env_name)
            .map_err(|_| GeneratorError::MissingCredentials(env_name))?;
        Ok(RemoteGenerator {
            name: spec.name.clone(),
            endpoint: spec.endpoint.clone(),
            api_key,
            temperature: spec.temperature,
            max_tokens: spec.max_tokens,
            retry_budget: spec.retry_budget,
            backoff_base: Duration::from_millis(200),
            in_flight: InFlight::new(spec.max_in_flight),
            audit: None,
        })
    }

    /// Append every request/response (or error) as a JSON line for audit.
    pub fn with_audit_log(mut self, path: impl AsRef<Path>) -> std::io::Result<Self> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        self.audit = Some(Mutex::new(file));
        Ok(self)
    }

    fn audit_event(&self, request: &serde_json::Value, outcome: &Result<String, GeneratorError>) {
        let Some(audit) = &self.audit else { return };
        let ts = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let entry = match outcome {
            Ok(text) => json!({"ts": ts, "model": self.name, "request": request, "response": text}),
            Err(err) => json!({"ts": ts, "model": self.name, "request": request, "error": err.to_string()}),
        };
        if let Ok(mut file) = audit.lock() {
            let _ = writeln!(file, "{entry}");
        }
    }

    /// Test/bench constructor with explicit credentials and backoff.
    pub fn with_params(
        name: impl Into<String>,
        endpoint: impl Into<String>,
        api_key: impl Into<String>,
        max_in_flight: usize,
        retry_budget: usize,
        backoff_base: Duration,
    ) -> Self {
        RemoteGenerator {
            name: name.into(),
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            temperature: 0.7,
            max_tokens: 2048,
            retry_budget,
            backoff_base,
            in_flight: InFlight::new(max_in_flight),
            audit: None,
        }
    }

    fn request_body(&self, turns: &[Turn]) -> serde_json::Value {
        let messages: Vec<serde_json::Value> = turns
            .iter()
            .map(|t| {
                json!({
                    "role": match t.role {
                        Role::Prompt => "user",
                        Role::Assistant => "assistant",
                    },
                    "content": t.text,
                })
            })
            .collect();
        json!({
            "model": self.name,
            "messages": messages,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        })
    }

    fn call_once(&self, body: &serde_json::Value) -> Result<String, GeneratorError> {
        let mut response = ureq::post(&self.endpoint)
            .header("authorization", format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| match e {
                ureq::Error::StatusCode(status) => GeneratorError::HttpStatus { status },
                other => GeneratorError::Transport {
                    attempts: 1,
                    message: other.to_string(),
                },
            })?;
        let parsed: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| GeneratorError::BadResponse(e.to_string()))?;
        parsed
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| {
                GeneratorError::BadResponse("missing choices[0].message.content".into())
            })
    }

    fn retryable(err: &GeneratorError) -> bool {
        match err {
            GeneratorError::Transport { .. } => true,
            GeneratorError::HttpStatus { status } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

impl Generator for RemoteGenerator {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, turns: &[Turn], _salt: u64) -> Result<String, GeneratorError> {
        let body = self.request_body(turns);
        self.in_flight.acquire();
        let result: Result<String, GeneratorError> = (|| {
            let attempts = self.retry_budget + 1;
            let mut last = None;
            for attempt in 0..attempts {
                if attempt > 0 {
                    std::thread::sleep(self.backoff_base * (1u32 << (attempt - 1).min(4)));
                }
                match self.call_once(&body) {
                    Ok(text) => return Ok(text),
                    Err(err) if Self::retryable(&err) => last = Some(err),
                    Err(err) => return Err(err),
                }
            }
            Err(GeneratorError::Transport {
                attempts,
                message: last.map(|e| e.to_string()).unwrap_or_default(),
            })
        })();
        self.in_flight.release();
        self.audit_event(&body, &result);
        result
    }
}
