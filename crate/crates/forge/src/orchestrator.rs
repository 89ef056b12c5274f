use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use forge_core::diagram::{render_json, render_svg, synthesize_with, SynthesisConfig};
use forge_core::layout::{layout, LayoutConfig};
use forge_core::lf::{self, Model};
use forge_core::tools::{SessionView, ToolRegistry};
use forge_core::{Diagnostic, Severity};
use forge_llm::{ChatMessage, GatewayError, LlmBackend, Payload};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::prompt::{extract_model_text, repair_message, user_message};
use crate::session::{
    DiagramRef, InputKind, Session, SessionConfig, Stage, StageTiming, ToolExchange, TurnError, TurnRecord, TurnStatus,
};
use crate::store::{SessionStore, StoreError};

/// Builds the LLM backend for a new or reloaded session.
pub type BackendFactory = Arc<dyn Fn() -> Arc<dyn LlmBackend> + Send + Sync>;

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("turn {0} not found")]
    NoTurn(usize),
    #[error("no diagram available")]
    NoDiagram,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Store(StoreError),
}

impl From<StoreError> for WorkbenchError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) | StoreError::InvalidId(id) => WorkbenchError::NotFound(id),
            other => WorkbenchError::Store(other),
        }
    }
}

pub type Result<T, E = WorkbenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("tool loop exceeded {0} round(s) without a final reply")]
    RoundLimit(usize),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

impl LoopError {
    pub fn code(&self) -> String {
        match self {
            LoopError::RoundLimit(_) => "tool_round_limit".into(),
            LoopError::Gateway(e) => gateway_code(e),
        }
    }
}

pub fn gateway_code(e: &GatewayError) -> String {
    match serde_json::to_value(e.kind()) {
        Ok(Value::String(s)) => s,
        _ => "gateway".into(),
    }
}

/// What one tool loop did, kept even when it fails.
#[derive(Debug, Clone, Default)]
pub struct LoopTrace {
    pub exchanges: Vec<ToolExchange>,
    pub chat_calls: usize,
    pub timings: Vec<StageTiming>,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Calls the backend until it answers with content, executing requested
/// tools in between. Fails when `max_rounds` chat calls all ask for tools.
#[allow(clippy::too_many_arguments)]
pub async fn run_tool_loop(
    backend: &dyn LlmBackend,
    messages: &mut Vec<ChatMessage>,
    tools: &Value,
    registry: &ToolRegistry,
    view: SessionView<'_>,
    max_rounds: usize,
    trace: &mut LoopTrace,
    on_stage: &(dyn Fn(Stage) + Sync),
) -> Result<String, LoopError> {
    for _ in 0..max_rounds.max(1) {
        on_stage(Stage::Chat);
        let started = Instant::now();
        let reply = backend.chat(messages, tools).await;
        trace.chat_calls += 1;
        trace.timings.push(StageTiming { stage: Stage::Chat, ms: elapsed_ms(started) });
        let calls = match reply?.payload {
            Payload::Content(content) => return Ok(content),
            Payload::ToolCalls(calls) => calls,
        };
        on_stage(Stage::Tools);
        let started = Instant::now();
        messages.push(ChatMessage::assistant_tool_calls(calls.clone()));
        for call in calls {
            let result = registry.execute(&call, view);
            messages.push(ChatMessage::tool(&call.id, &result.content));
            trace.exchanges.push(ToolExchange { call, result });
        }
        trace.timings.push(StageTiming { stage: Stage::Tools, ms: elapsed_ms(started) });
    }
    Err(LoopError::RoundLimit(max_rounds))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Progress {
    pub turn: Option<usize>,
    pub stage: String,
}

impl Progress {
    fn idle() -> Self {
        Progress { turn: None, stage: "idle".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AudioOutcome {
    pub transcript: String,
    pub pending: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turn: Option<TurnRecord>,
}

struct Live {
    session: Session,
    model: Option<Model>,
}

struct Slot {
    live: RwLock<Live>,
    turn: tokio::sync::Mutex<()>,
    progress: Mutex<Progress>,
    backend: Arc<dyn LlmBackend>,
}

impl Slot {
    fn snapshot(&self) -> (Session, Option<Model>) {
        let live = self.live.read().expect("session lock");
        (live.session.clone(), live.model.clone())
    }

    fn set_stage(&self, turn: usize, stage: Stage) {
        *self.progress.lock().expect("progress lock") = Progress { turn: Some(turn), stage: stage.as_str().into() };
    }
}

fn parse_model(text: &str) -> (Option<Model>, Vec<Diagnostic>) {
    match lf::parse_model(text) {
        Ok(m) => (Some(m), Vec::new()),
        Err(d) => (None, d),
    }
}

fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

/// One candidate reply and what became of it.
struct Candidate {
    reply: String,
    text: String,
    model: Option<Model>,
    diagnostics: Vec<Diagnostic>,
}

/// Sessions, turns and their persistence.
pub struct Workbench {
    store: SessionStore,
    registry: Arc<ToolRegistry>,
    tools: Value,
    factory: BackendFactory,
    layout: LayoutConfig,
    synthesis: SynthesisConfig,
    slots: Mutex<HashMap<String, Arc<Slot>>>,
}

impl Workbench {
    pub fn open(data_dir: impl AsRef<Path>, registry: ToolRegistry, factory: BackendFactory) -> Result<Self> {
        if registry.is_empty() {
            return Err(WorkbenchError::InvalidInput("tool registry is empty".into()));
        }
        let store = SessionStore::open(data_dir).map_err(WorkbenchError::Store)?;
        let tools = registry.list_tools();
        Ok(Workbench {
            store,
            registry: Arc::new(registry),
            tools,
            factory,
            layout: LayoutConfig::default(),
            synthesis: SynthesisConfig::default(),
            slots: Mutex::new(HashMap::new()),
        })
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn registry(&self) -> &ToolRegistry {
        &self.registry
    }

    /// The wire tool array sent with every chat call.
    pub fn tools(&self) -> &Value {
        &self.tools
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>> {
        let mut slots = self.slots.lock().expect("slot map lock");
        if let Some(slot) = slots.get(id) {
            return Ok(slot.clone());
        }
        let session = self.store.load(id)?;
        let (model, _) = parse_model(&session.current_model_text);
        let slot = Arc::new(Slot {
            live: RwLock::new(Live { session, model }),
            turn: tokio::sync::Mutex::new(()),
            progress: Mutex::new(Progress::idle()),
            backend: (self.factory)(),
        });
        slots.insert(id.to_string(), slot.clone());
        Ok(slot)
    }

    pub fn create_session(&self, config: SessionConfig) -> Result<Session> {
        config.check().map_err(WorkbenchError::InvalidInput)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let tools = self.registry.schemas().map(|s| s.name.clone()).collect();
        let mut session = Session::new(id.clone(), config, tools);
        let (model, _) = parse_model("");
        session.model_parses = model.is_some();
        self.store.save(&session).map_err(WorkbenchError::Store)?;
        let slot = Arc::new(Slot {
            live: RwLock::new(Live { session: session.clone(), model }),
            turn: tokio::sync::Mutex::new(()),
            progress: Mutex::new(Progress::idle()),
            backend: (self.factory)(),
        });
        self.slots.lock().expect("slot map lock").insert(id, slot);
        Ok(session)
    }

    pub fn session(&self, id: &str) -> Result<Session> {
        Ok(self.slot(id)?.snapshot().0)
    }

    /// The parsed model, when the current text parses.
    pub fn current_model(&self, id: &str) -> Result<Option<Model>> {
        Ok(self.slot(id)?.snapshot().1)
    }

    pub fn progress(&self, id: &str) -> Result<Progress> {
        Ok(self.slot(id)?.progress.lock().expect("progress lock").clone())
    }

    pub fn diagnostics(&self, id: &str, turn: Option<usize>) -> Result<Vec<Diagnostic>> {
        let session = self.session(id)?;
        match turn {
            Some(n) => Ok(session.turn(n).ok_or(WorkbenchError::NoTurn(n))?.diagnostics.clone()),
            None => Ok(session.diagnostics().to_vec()),
        }
    }

    /// Stored diagram bytes of a turn (latest by default), as SVG or JSON.
    pub fn diagram(&self, id: &str, turn: Option<usize>, json: bool) -> Result<Vec<u8>> {
        let session = self.session(id)?;
        if let Some(n) = turn {
            session.turn(n).ok_or(WorkbenchError::NoTurn(n))?;
        }
        let record = session.diagram_turn(turn).ok_or(WorkbenchError::NoDiagram)?;
        let refs = record.diagram.as_ref().ok_or(WorkbenchError::NoDiagram)?;
        let name = if json { &refs.json } else { &refs.svg };
        self.store.read_artifact(id, name).map_err(|e| match e {
            StoreError::NotFound(_) => WorkbenchError::NoDiagram,
            other => WorkbenchError::Store(other),
        })
    }

    /// Transcribes speech. The transcript either waits for confirmation or,
    /// with `auto_send`, immediately drives a prompt turn.
    pub async fn submit_audio(
        &self,
        id: &str,
        audio: &[u8],
        media_type: &str,
        language: Option<&str>,
    ) -> Result<AudioOutcome> {
        let slot = self.slot(id)?;
        let _turn = slot.turn.lock().await;
        let (mut session, _) = slot.snapshot();
        slot.set_stage(session.turns.len() + 1, Stage::Transcribe);
        let started = Instant::now();
        let transcribed = slot.backend.transcribe(audio, media_type, language).await;
        let transcribe_ms = elapsed_ms(started);
        let transcript = match transcribed {
            Ok(t) => t,
            Err(e) => {
                *slot.progress.lock().expect("progress lock") = Progress::idle();
                return Err(e.into());
            }
        };
        if session.config.auto_send && !transcript.trim().is_empty() {
            let timing = StageTiming { stage: Stage::Transcribe, ms: transcribe_ms };
            let record = self.prompt_turn(&slot, Some(transcript.clone()), &transcript, vec![timing]).await?;
            return Ok(AudioOutcome { transcript, pending: false, turn: Some(record) });
        }
        session.pending_transcript = Some(transcript.clone());
        self.commit(&slot, session, None)?;
        Ok(AudioOutcome { transcript, pending: true, turn: None })
    }

    /// Runs one refinement turn. A pending transcript makes it a speech
    /// turn with `text` as the confirmed prompt.
    pub async fn submit_prompt(&self, id: &str, text: &str) -> Result<TurnRecord> {
        if text.trim().is_empty() {
            return Err(WorkbenchError::InvalidInput("prompt must not be empty".into()));
        }
        let slot = self.slot(id)?;
        let _turn = slot.turn.lock().await;
        let transcript = slot.live.read().expect("session lock").session.pending_transcript.clone();
        self.prompt_turn(&slot, transcript, text, Vec::new()).await
    }

    /// Replaces the model text directly.
    pub async fn edit_model(&self, id: &str, text: &str) -> Result<TurnRecord> {
        let slot = self.slot(id)?;
        let _turn = slot.turn.lock().await;
        let (mut session, _) = slot.snapshot();
        let index = session.turns.len() + 1;
        let mut timings = Vec::new();
        slot.set_stage(index, Stage::Parse);
        let started = Instant::now();
        let (model, mut diagnostics) = parse_model(text);
        timings.push(StageTiming { stage: Stage::Parse, ms: elapsed_ms(started) });
        if let Some(m) = &model {
            slot.set_stage(index, Stage::Validate);
            let started = Instant::now();
            diagnostics = lf::validate(m);
            timings.push(StageTiming { stage: Stage::Validate, ms: elapsed_ms(started) });
        }
        let diagram = match &model {
            Some(m) => Some(self.render_diagram(&slot, &session.id, index, m, &mut timings)?),
            None => None,
        };
        let record = TurnRecord {
            index,
            input: InputKind::Edit,
            status: TurnStatus::Ok,
            transcript: None,
            prompt: None,
            tool_trace: Vec::new(),
            chat_calls: 0,
            reply: None,
            repaired: false,
            model_text_after: text.to_string(),
            model_updated: true,
            diagnostics,
            diagram,
            timings,
            error: None,
        };
        session.current_model_text = text.to_string();
        session.model_parses = model.is_some();
        session.turns.push(record.clone());
        self.commit(&slot, session, Some(model))?;
        Ok(record)
    }

    fn render_diagram(
        &self,
        slot: &Slot,
        id: &str,
        index: usize,
        model: &Model,
        timings: &mut Vec<StageTiming>,
    ) -> Result<DiagramRef> {
        slot.set_stage(index, Stage::Synthesize);
        let started = Instant::now();
        let graph = synthesize_with(model, self.synthesis);
        timings.push(StageTiming { stage: Stage::Synthesize, ms: elapsed_ms(started) });
        slot.set_stage(index, Stage::Layout);
        let started = Instant::now();
        let laid = layout(&graph, &self.layout);
        timings.push(StageTiming { stage: Stage::Layout, ms: elapsed_ms(started) });
        slot.set_stage(index, Stage::Render);
        let started = Instant::now();
        let (svg, json) = (render_svg(&laid), render_json(&laid));
        timings.push(StageTiming { stage: Stage::Render, ms: elapsed_ms(started) });
        let (svg, json) = self.store.write_artifacts(id, index, &svg, &json).map_err(WorkbenchError::Store)?;
        Ok(DiagramRef { svg, json })
    }

    /// Persists `session` and publishes it to readers.
    fn commit(&self, slot: &Slot, session: Session, model: Option<Option<Model>>) -> Result<()> {
        if let Some(turn) = session.turns.last() {
            slot.set_stage(turn.index, Stage::Persist);
        }
        let saved = self.store.save(&session).map_err(WorkbenchError::Store);
        if saved.is_ok() {
            let mut live = slot.live.write().expect("session lock");
            live.session = session;
            if let Some(model) = model {
                live.model = model;
            }
        }
        *slot.progress.lock().expect("progress lock") = Progress::idle();
        saved
    }

    fn messages(&self, session: &Session, prompt: &str) -> Vec<ChatMessage> {
        let mut messages = vec![ChatMessage::system(&session.config.system_prompt)];
        let history: Vec<&TurnRecord> = session
            .turns
            .iter()
            .filter(|t| t.prompt.is_some() && t.reply.is_some())
            .collect();
        let skip = history.len().saturating_sub(session.config.include_history);
        for t in &history[skip..] {
            messages.push(ChatMessage::user(t.prompt.as_deref().unwrap_or_default()));
            messages.push(ChatMessage::assistant(t.reply.as_deref().unwrap_or_default()));
        }
        messages.push(ChatMessage::user(user_message(prompt, &session.current_model_text)));
        messages
    }

    async fn prompt_turn(
        &self,
        slot: &Slot,
        transcript: Option<String>,
        prompt: &str,
        mut timings: Vec<StageTiming>,
    ) -> Result<TurnRecord> {
        let (mut session, previous) = slot.snapshot();
        let index = session.turns.len() + 1;
        let config = session.config.clone();
        let mut messages = self.messages(&session, prompt);
        let view_diagnostics = session.diagnostics().to_vec();
        let view = SessionView { model_text: &session.current_model_text, diagnostics: &view_diagnostics };
        let on_stage = |stage: Stage| slot.set_stage(index, stage);
        let mut trace = LoopTrace::default();
        let attempts = if config.auto_repair { 2 } else { 1 };
        let mut candidates: Vec<Candidate> = Vec::new();
        let mut failure: Option<LoopError> = None;

        for attempt in 0..attempts {
            if attempt > 0 {
                let last = candidates.last().expect("a previous candidate");
                if !has_errors(&last.diagnostics) {
                    break;
                }
                messages.push(ChatMessage::assistant(&last.reply));
                messages.push(ChatMessage::user(repair_message(&last.diagnostics)));
            }
            let reply = run_tool_loop(
                slot.backend.as_ref(),
                &mut messages,
                &self.tools,
                &self.registry,
                view,
                config.max_tool_rounds,
                &mut trace,
                &on_stage,
            )
            .await;
            let reply = match reply {
                Ok(r) => r,
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            };
            on_stage(Stage::Extract);
            let started = Instant::now();
            let text = extract_model_text(&reply);
            trace.timings.push(StageTiming { stage: Stage::Extract, ms: elapsed_ms(started) });
            on_stage(Stage::Parse);
            let started = Instant::now();
            let (model, mut diagnostics) = parse_model(&text);
            trace.timings.push(StageTiming { stage: Stage::Parse, ms: elapsed_ms(started) });
            if let Some(m) = &model {
                on_stage(Stage::Validate);
                let started = Instant::now();
                diagnostics = lf::validate(m);
                trace.timings.push(StageTiming { stage: Stage::Validate, ms: elapsed_ms(started) });
            }
            candidates.push(Candidate { reply, text, model, diagnostics });
        }
        timings.append(&mut trace.timings);

        let repaired_index = candidates.iter().rposition(|c| c.model.is_some()).or(candidates.len().checked_sub(1));
        let chosen = repaired_index.map(|i| (i, candidates.swap_remove(i)));
        let error = failure.map(|e| TurnError { code: e.code(), message: e.to_string() });
        let mut record = TurnRecord {
            index,
            input: if transcript.is_some() { InputKind::Speech } else { InputKind::Text },
            status: if chosen.is_some() { TurnStatus::Ok } else { TurnStatus::Failed },
            transcript,
            prompt: Some(prompt.to_string()),
            tool_trace: trace.exchanges,
            chat_calls: trace.chat_calls,
            reply: None,
            repaired: false,
            model_text_after: session.current_model_text.clone(),
            model_updated: false,
            diagnostics: view_diagnostics.clone(),
            diagram: None,
            timings,
            error,
        };

        let mut new_model = None;
        if let Some((i, c)) = chosen {
            record.repaired = i > 0;
            record.reply = Some(c.reply);
            record.model_text_after = c.text.clone();
            record.diagnostics = c.diagnostics;
            if let Some(model) = c.model {
                record.model_updated = true;
                session.current_model_text = c.text;
                session.model_parses = true;
                new_model = Some(Some(model));
            }
        }
        let shown = match &new_model {
            Some(m) => m.as_ref(),
            None if record.status == TurnStatus::Ok => previous.as_ref(),
            None => None,
        };
        if let Some(m) = shown {
            record.diagram = Some(self.render_diagram(slot, &session.id, index, m, &mut record.timings)?);
        }
        session.pending_transcript = None;
        session.turns.push(record.clone());
        self.commit(slot, session, new_model)?;
        Ok(record)
    }
}
