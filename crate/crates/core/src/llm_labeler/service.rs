use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::Finding;

pub const DEFAULT_MODEL: &str = "deepseek-chat";

/// Environment variable read for the bearer token.
pub const API_KEY_ENV: &str = "CXREVAL_LABELER_API_KEY";

/// Instruction sent with every report.
pub fn default_instruction() -> String {
    let names: Vec<&str> = Finding::ALL.iter().map(|f| f.display_name()).collect();
    format!(
        "You label chest X-ray reports. Read the report and decide, for each of these findings, \
         whether the report states it is present (1) or not (0): {}. Treat uncertain or possible \
         findings as present. Reply with a single JSON object whose keys are exactly these names \
         and whose values are the integers 0 or 1. Do not add any other text.",
        names.join(", ")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelerRequest {
    pub model: String,
    pub instruction: String,
    pub report_text: String,
    pub temperature: f64,
}

impl LabelerRequest {
    pub fn new(model: &str, report_text: &str) -> Self {
        LabelerRequest {
            model: model.to_string(),
            instruction: default_instruction(),
            report_text: report_text.to_string(),
            temperature: 0.0,
        }
    }

    /// Chat-completion request body.
    pub fn to_wire(&self) -> Value {
        json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": self.instruction},
                {"role": "user", "content": self.report_text},
            ],
        })
    }

    /// Inverse of [`to_wire`](Self::to_wire); the last user message is the
    /// report.
    pub fn from_wire(body: &Value) -> Option<Self> {
        let messages = body.get("messages")?.as_array()?;
        let content = |role: &str| {
            messages
                .iter()
                .rev()
                .find(|m| m.get("role").and_then(Value::as_str) == Some(role))
                .and_then(|m| m.get("content")?.as_str())
                .map(str::to_string)
        };
        Some(LabelerRequest {
            model: body.get("model").and_then(Value::as_str).unwrap_or_default().to_string(),
            instruction: content("system").unwrap_or_default(),
            report_text: content("user")?,
            temperature: body.get("temperature").and_then(Value::as_f64).unwrap_or(0.0),
        })
    }
}

/// Wraps reply text in a chat-completion response envelope.
pub fn wrap_completion(content: &str) -> Value {
    json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]})
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ServiceError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {code}: {body}")]
    Status { code: u16, body: String },
    #[error("response envelope not understood: {0}")]
    Envelope(String),
}

impl ServiceError {
    /// Rate limits, server errors and transport failures are worth retrying;
    /// other client errors are not.
    pub fn is_retryable(&self) -> bool {
        match self {
            ServiceError::Transport(_) | ServiceError::Envelope(_) => true,
            ServiceError::Status { code, .. } => *code == 429 || *code >= 500,
        }
    }

    /// True when the service could not be reached at all.
    pub fn is_unreachable(&self) -> bool {
        matches!(self, ServiceError::Transport(_))
    }
}

/// Anything that turns a request into raw reply text.
pub trait LabelService: Send + Sync {
    fn complete(&self, request: &LabelerRequest) -> Result<String, ServiceError>;
}

/// Client for a chat-completion-style HTTP endpoint.
#[derive(Debug, Clone)]
pub struct HttpLabelService {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpLabelService {
    pub fn new(endpoint: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        HttpLabelService { endpoint: endpoint.to_string(), api_key, agent }
    }

    /// Reads the key from [`API_KEY_ENV`] if set.
    pub fn from_env(endpoint: &str, timeout: Duration) -> Self {
        Self::new(endpoint, std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()), timeout)
    }
}

impl LabelService for HttpLabelService {
    fn complete(&self, request: &LabelerRequest) -> Result<String, ServiceError> {
        let mut call = self.agent.post(&self.endpoint).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.set("Authorization", &format!("Bearer {key}"));
        }
        let response = match call.send_json(request.to_wire()) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let body = r.into_string().unwrap_or_default();
                return Err(ServiceError::Status { code, body: body.chars().take(500).collect() });
            }
            Err(ureq::Error::Transport(t)) => return Err(ServiceError::Transport(t.to_string())),
        };
        let body: Value = response.into_json().map_err(|e| ServiceError::Envelope(e.to_string()))?;
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ServiceError::Envelope("missing choices[0].message.content".into()))
    }
}
