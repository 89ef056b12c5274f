use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::{
    check_audio, check_chat_request, AssistantResponse, ChatMessage, GatewayError, LlmBackend, Payload, Result,
    Role, ToolCall,
};

/// A replayable conversation: one entry per expected chat call, plus
/// transcripts keyed by the SHA-256 of the audio bytes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub turns: Vec<ScriptTurn>,
    #[serde(default)]
    pub transcripts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptTurn {
    /// Substring the latest user message must contain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_user_contains: Option<String>,
    /// Exact contents of the tool messages since the last assistant message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_tool_results: Option<Vec<String>>,
    pub respond: ScriptResponse,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_calls: Option<Vec<ScriptToolCall>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptToolCall {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub name: String,
    /// Either a JSON object or its serialized text.
    #[serde(default)]
    pub arguments: Value,
}

impl Script {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn audio_key(audio: &[u8]) -> String {
        hex::encode(Sha256::digest(audio))
    }
}

/// Offline backend that replays a [`Script`] in order.
#[derive(Debug)]
pub struct ScriptedMock {
    script: Script,
    cursor: Mutex<usize>,
}

impl ScriptedMock {
    pub fn new(script: Script) -> Self {
        ScriptedMock { script, cursor: Mutex::new(0) }
    }

    pub fn from_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let script = Script::from_json(&text).map_err(std::io::Error::other)?;
        Ok(Self::new(script))
    }

    pub fn script(&self) -> &Script {
        &self.script
    }

    /// Chat calls consumed so far.
    pub fn position(&self) -> usize {
        *self.cursor.lock().expect("cursor lock")
    }

    pub fn remaining(&self) -> usize {
        self.script.turns.len() - self.position()
    }
}

fn trailing_tool_results(messages: &[ChatMessage]) -> Vec<&str> {
    let tail = messages.iter().rev().take_while(|m| m.role == Role::Tool).collect::<Vec<_>>();
    tail.into_iter().rev().map(|m| m.content.as_str()).collect()
}

fn diff(expected: &[String], actual: &[&str]) -> String {
    let mut out = String::new();
    for i in 0..expected.len().max(actual.len()) {
        match (expected.get(i), actual.get(i)) {
            (Some(e), Some(a)) if e == a => out.push_str(&format!("  {e}\n")),
            (e, a) => {
                if let Some(e) = e {
                    out.push_str(&format!("- {e}\n"));
                }
                if let Some(a) = a {
                    out.push_str(&format!("+ {a}\n"));
                }
            }
        }
    }
    out
}

fn check_turn(turn: &ScriptTurn, messages: &[ChatMessage]) -> std::result::Result<(), String> {
    if let Some(needle) = &turn.expect_user_contains {
        let last_user = messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str());
        match last_user {
            Some(text) if text.contains(needle.as_str()) => {}
            Some(text) => return Err(format!("- user message containing {needle:?}\n+ {text:?}\n")),
            None => return Err(format!("- user message containing {needle:?}\n+ (no user message)\n")),
        }
    }
    if let Some(expected) = &turn.expect_tool_results {
        let actual = trailing_tool_results(messages);
        if actual.len() != expected.len() || actual.iter().zip(expected).any(|(a, e)| a != e) {
            return Err(diff(expected, &actual));
        }
    }
    Ok(())
}

fn respond(turn: &ScriptTurn, index: usize) -> AssistantResponse {
    let calls = turn.respond.tool_calls.as_deref().unwrap_or_default();
    let payload = if calls.is_empty() {
        Payload::Content(turn.respond.content.clone().unwrap_or_default())
    } else {
        Payload::ToolCalls(
            calls
                .iter()
                .enumerate()
                .map(|(k, c)| ToolCall {
                    id: c.id.clone().unwrap_or_else(|| format!("call_{}_{}", index + 1, k + 1)),
                    name: c.name.clone(),
                    arguments: match &c.arguments {
                        Value::String(s) => s.clone(),
                        Value::Null => "{}".into(),
                        other => other.to_string(),
                    },
                })
                .collect(),
        )
    };
    AssistantResponse { payload, usage: None }
}

#[async_trait]
impl LlmBackend for ScriptedMock {
    fn name(&self) -> &str {
        "mock"
    }

    async fn chat(&self, messages: &[ChatMessage], _tools: &Value) -> Result<AssistantResponse> {
        check_chat_request(messages)?;
        let mut cursor = self.cursor.lock().expect("cursor lock");
        let index = *cursor;
        let turn = self.script.turns.get(index).ok_or(GatewayError::ScriptExhausted { calls: index })?;
        check_turn(turn, messages).map_err(|diff| GatewayError::ScriptMismatch { call: index + 1, diff })?;
        *cursor += 1;
        Ok(respond(turn, index))
    }

    async fn transcribe(&self, audio: &[u8], media_type: &str, _language: Option<&str>) -> Result<String> {
        check_audio(audio, media_type)?;
        let key = Script::audio_key(audio);
        self.script.transcripts.get(&key).cloned().ok_or_else(|| GatewayError::ScriptMismatch {
            call: self.position() + 1,
            diff: format!("- transcript for audio {key}\n+ (none scripted)\n"),
        })
    }
}
