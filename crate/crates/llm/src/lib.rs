//! Chat-completion and transcription backends for the modeling loop.
//!
//! [`OpenAiGateway`] talks to any OpenAI-compatible endpoint; [`ScriptedMock`]
//! replays a JSON script so sessions can run offline and deterministically.

mod config;
mod error;
mod mock;
mod openai;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

pub use config::{ApiKey, Backoff, GatewayConfig};
pub use error::{ErrorKind, GatewayError};
pub use forge_core::tools::ToolCall;
pub use mock::{Script, ScriptResponse, ScriptToolCall, ScriptTurn, ScriptedMock};
pub use openai::OpenAiGateway;

pub type Result<T, E = GatewayError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ToolCall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
}

impl ChatMessage {
    fn plain(role: Role, content: impl Into<String>) -> Self {
        ChatMessage { role, content: content.into(), tool_calls: Vec::new(), tool_call_id: None }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::plain(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::plain(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::plain(Role::Assistant, content)
    }

    pub fn assistant_tool_calls(calls: Vec<ToolCall>) -> Self {
        ChatMessage { tool_calls: calls, ..Self::plain(Role::Assistant, "") }
    }

    pub fn tool(call_id: impl Into<String>, content: impl Into<String>) -> Self {
        ChatMessage { tool_call_id: Some(call_id.into()), ..Self::plain(Role::Tool, content) }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

/// What the assistant wants next: a final answer or tool executions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Content(String),
    ToolCalls(Vec<ToolCall>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssistantResponse {
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

pub const AUDIO_MEDIA_TYPES: [&str; 3] = ["audio/wav", "audio/webm", "audio/ogg"];

#[async_trait]
pub trait LlmBackend: Send + Sync {
    /// Short backend label for logs and session records.
    fn name(&self) -> &str;

    async fn chat(&self, messages: &[ChatMessage], tools: &serde_json::Value) -> Result<AssistantResponse>;

    async fn transcribe(&self, audio: &[u8], media_type: &str, language: Option<&str>) -> Result<String>;
}

/// Rejects requests that can never succeed, before any network use.
pub fn check_chat_request(messages: &[ChatMessage]) -> Result<()> {
    match messages.first() {
        None => Err(GatewayError::Precondition("messages must not be empty".into())),
        Some(m) if m.role != Role::System => {
            Err(GatewayError::Precondition("the first message must be the system prompt".into()))
        }
        Some(_) => Ok(()),
    }
}

/// Validates an audio upload and returns its media type without parameters.
pub fn check_audio(audio: &[u8], media_type: &str) -> Result<&'static str> {
    if audio.is_empty() {
        return Err(GatewayError::Precondition("audio payload is empty".into()));
    }
    let essence = media_type.split(';').next().unwrap_or_default().trim().to_ascii_lowercase();
    AUDIO_MEDIA_TYPES
        .iter()
        .find(|t| **t == essence)
        .copied()
        .ok_or_else(|| GatewayError::UnsupportedMedia(media_type.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chat_preconditions() {
        assert_eq!(check_chat_request(&[]).unwrap_err().kind(), ErrorKind::Precondition);
        assert!(check_chat_request(&[ChatMessage::user("hi")]).is_err());
        assert!(check_chat_request(&[ChatMessage::system("s"), ChatMessage::user("hi")]).is_ok());
    }

    #[test]
    fn audio_preconditions() {
        assert_eq!(check_audio(b"", "audio/wav").unwrap_err().kind(), ErrorKind::Precondition);
        assert_eq!(check_audio(b"x", "text/plain").unwrap_err().kind(), ErrorKind::UnsupportedMedia);
        assert_eq!(check_audio(b"x", "audio/webm;codecs=opus").unwrap(), "audio/webm");
    }

    #[test]
    fn message_serialization_skips_empty_fields() {
        let v = serde_json::to_value(ChatMessage::user("hi")).unwrap();
        assert_eq!(v, serde_json::json!({"role": "user", "content": "hi"}));
        let t = serde_json::to_value(ChatMessage::tool("c1", "ok")).unwrap();
        assert_eq!(t["tool_call_id"], "c1");
    }
}
