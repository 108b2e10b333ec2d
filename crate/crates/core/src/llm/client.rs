use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

/// Environment variable holding the bearer token for the endpoint.
pub const API_KEY_ENV: &str = "WHOW_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("unexpected response body: {0}")]
    BadBody(String),
}

/// A chat-completion backend. Implementations must be usable from several
/// worker threads at once.
pub trait ChatClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError>;
}

/// OpenAI-style `POST {endpoint}` with `{"model", "temperature", "messages"}`
/// returning `choices[0].message.content`.
pub struct HttpChatClient {
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl HttpChatClient {
    pub fn new(api_key: Option<String>, timeout: Duration) -> Self {
        HttpChatClient {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            api_key,
        }
    }

    /// Reads the key from [`API_KEY_ENV`].
    pub fn from_env(timeout: Duration) -> Self {
        HttpChatClient::new(
            std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            timeout,
        )
    }
}

pub fn extract_content(body: &Value) -> Result<String, ClientError> {
    body.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ClientError::BadBody(body.to_string().chars().take(200).collect()))
}

impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError> {
        let mut req = self
            .agent
            .post(&request.endpoint)
            .set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let payload = json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        });
        match req.send_json(payload) {
            Ok(resp) => {
                let body: Value = resp
                    .into_json()
                    .map_err(|e| ClientError::BadBody(e.to_string()))?;
                extract_content(&body)
            }
            Err(ureq::Error::Status(status, resp)) => Err(ClientError::Status {
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(e) => Err(ClientError::Transport(e.to_string())),
        }
    }
}
