use forge_core::tools::{ToolCall, ToolResult};
use forge_core::Diagnostic;
use serde::{Deserialize, Serialize};

use crate::prompt::SYSTEM_PROMPT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    /// Send a transcript as a prompt without waiting for confirmation.
    pub auto_send: bool,
    /// Prior prompt turns replayed into the conversation (0 = none).
    pub include_history: usize,
    /// Retry once with the diagnostics when a reply does not yield a clean model.
    pub auto_repair: bool,
    pub max_tool_rounds: usize,
    pub system_prompt: String,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            auto_send: false,
            include_history: 0,
            auto_repair: false,
            max_tool_rounds: 8,
            system_prompt: SYSTEM_PROMPT.to_string(),
        }
    }
}

impl SessionConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.max_tool_rounds == 0 {
            return Err("max_tool_rounds must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Speech,
    Text,
    Edit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Transcribe,
    Chat,
    Tools,
    Extract,
    Parse,
    Validate,
    Synthesize,
    Layout,
    Render,
    Persist,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Transcribe => "transcribe",
            Stage::Chat => "chat",
            Stage::Tools => "tools",
            Stage::Extract => "extract",
            Stage::Parse => "parse",
            Stage::Validate => "validate",
            Stage::Synthesize => "synthesize",
            Stage::Layout => "layout",
            Stage::Render => "render",
            Stage::Persist => "persist",
        }
    }

    /// Stages that involve the LLM vendor.
    pub fn is_network(self) -> bool {
        matches!(self, Stage::Transcribe | Stage::Chat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolExchange {
    pub call: ToolCall,
    pub result: ToolResult,
}

/// Artifact file names, relative to the session's artifact directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramRef {
    pub svg: String,
    pub json: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    /// 1-based position in the session history.
    pub index: usize,
    pub input: InputKind,
    pub status: TurnStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default)]
    pub tool_trace: Vec<ToolExchange>,
    #[serde(default)]
    pub chat_calls: usize,
    /// Final assistant reply, verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default)]
    pub repaired: bool,
    /// Text the turn produced: the edited text or the extracted reply.
    pub model_text_after: String,
    /// Whether the session model was replaced by `model_text_after`.
    pub model_updated: bool,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram: Option<DiagramRef>,
    pub timings: Vec<StageTiming>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<TurnError>,
}

impl TurnRecord {
    pub fn timing(&self, stage: Stage) -> Option<f64> {
        let mut hits = self.timings.iter().filter(|t| t.stage == stage).peekable();
        hits.peek()?;
        Some(hits.map(|t| t.ms).sum())
    }
}

/// Persisted state of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub config: SessionConfig,
    pub current_model_text: String,
    /// Whether `current_model_text` parses.
    pub model_parses: bool,
    pub turns: Vec<TurnRecord>,
    /// Tool names available to the LLM.
    pub tools: Vec<String>,
    /// Transcript waiting for confirmation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_transcript: Option<String>,
}

impl Session {
    pub fn new(id: String, config: SessionConfig, tools: Vec<String>) -> Self {
        Session {
            id,
            config,
            current_model_text: String::new(),
            model_parses: false,
            turns: Vec::new(),
            tools,
            pending_transcript: None,
        }
    }

    pub fn turn(&self, index: usize) -> Option<&TurnRecord> {
        index.checked_sub(1).and_then(|i| self.turns.get(i))
    }

    /// Diagnostics of the latest turn.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        self.turns.last().map(|t| t.diagnostics.as_slice()).unwrap_or_default()
    }

    /// The latest turn with a diagram, at or before `turn` when given.
    pub fn diagram_turn(&self, turn: Option<usize>) -> Option<&TurnRecord> {
        match turn {
            Some(n) => self.turn(n).filter(|t| t.diagram.is_some()),
            None => self.turns.iter().rev().find(|t| t.diagram.is_some()),
        }
    }
}
