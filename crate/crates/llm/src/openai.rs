use async_trait::async_trait;
use rand::Rng;
use reqwest::multipart::{Form, Part};
use serde_json::{json, Value};

use crate::{
    check_audio, check_chat_request, AssistantResponse, ChatMessage, GatewayConfig, GatewayError, LlmBackend,
    Payload, Result, Role, ToolCall, Usage,
};

/// Client for OpenAI-compatible `chat/completions` and `audio/transcriptions`.
pub struct OpenAiGateway {
    cfg: GatewayConfig,
    http: reqwest::Client,
}

impl std::fmt::Debug for OpenAiGateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpenAiGateway").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

const BODY_EXCERPT: usize = 300;

impl OpenAiGateway {
    pub fn new(cfg: GatewayConfig) -> Result<Self> {
        cfg.check().map_err(GatewayError::Precondition)?;
        let http = reqwest::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| GatewayError::Precondition(format!("cannot build HTTP client: {e}")))?;
        Ok(OpenAiGateway { cfg, http })
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.cfg
    }

    fn redact(&self, text: &str) -> String {
        let key = self.cfg.api_key.expose();
        if key.is_empty() {
            text.to_string()
        } else {
            text.replace(key, "<redacted>")
        }
    }

    async fn attempt(&self, req: reqwest::RequestBuilder, attempts: u32) -> Result<String> {
        let network = |e: reqwest::Error| {
            if e.is_timeout() {
                GatewayError::Timeout { attempts }
            } else {
                GatewayError::Transport { attempts, message: self.redact(&e.to_string()) }
            }
        };
        let resp = req.bearer_auth(self.cfg.api_key.expose()).send().await.map_err(network)?;
        let status = resp.status().as_u16();
        let body = resp.text().await.map_err(network)?;
        match status {
            200..=299 => Ok(body),
            401 | 403 => Err(GatewayError::Auth { status }),
            _ => {
                let excerpt: String = body.chars().take(BODY_EXCERPT).collect();
                Err(GatewayError::Http { status, message: self.redact(&excerpt) })
            }
        }
    }

    /// Sends the request built by `make` until it succeeds, fails in a way
    /// that retrying cannot fix, or the retry budget is spent.
    async fn send(&self, make: impl Fn() -> reqwest::RequestBuilder) -> Result<String> {
        let mut retry = 0u32;
        loop {
            let err = match self.attempt(make(), retry + 1).await {
                Ok(body) => return Ok(body),
                Err(e) => e,
            };
            if !err.is_retryable() || retry >= self.cfg.max_retries {
                return Err(err);
            }
            let delay = self.cfg.backoff.delay(retry, rand::rng().random::<f64>());
            tracing::warn!(attempt = retry + 1, ?delay, error = %err, "retrying LLM request");
            tokio::time::sleep(delay).await;
            retry += 1;
        }
    }
}

fn wire_message(m: &ChatMessage) -> Value {
    let mut v = json!({ "role": m.role, "content": m.content });
    if !m.tool_calls.is_empty() {
        if m.content.is_empty() {
            v["content"] = Value::Null;
        }
        v["tool_calls"] = m
            .tool_calls
            .iter()
            .map(|c| json!({"id": c.id, "type": "function", "function": {"name": c.name, "arguments": c.arguments}}))
            .collect();
    }
    if let (Role::Tool, Some(id)) = (m.role, &m.tool_call_id) {
        v["tool_call_id"] = json!(id);
    }
    v
}

/// Request body for `chat/completions`.
pub(crate) fn chat_body(model: &str, messages: &[ChatMessage], tools: &Value) -> Value {
    let mut body = json!({
        "model": model,
        "messages": messages.iter().map(wire_message).collect::<Vec<_>>(),
    });
    if tools.as_array().is_some_and(|a| !a.is_empty()) {
        body["tools"] = tools.clone();
    }
    body
}

/// Extracts the actionable payload from a `chat/completions` response body.
pub(crate) fn parse_chat_response(body: &str) -> Result<AssistantResponse> {
    let v: Value = serde_json::from_str(body).map_err(|e| GatewayError::Malformed(format!("not JSON: {e}")))?;
    let message = v
        .pointer("/choices/0/message")
        .ok_or_else(|| GatewayError::Malformed("missing choices[0].message".into()))?;
    let usage = v.get("usage").and_then(|u| serde_json::from_value::<Usage>(u.clone()).ok());
    let calls = message.get("tool_calls").and_then(Value::as_array).filter(|c| !c.is_empty());
    let payload = match calls {
        Some(calls) => {
            let mut out = Vec::new();
            for c in calls {
                let name = c.pointer("/function/name").and_then(Value::as_str);
                let id = c.get("id").and_then(Value::as_str);
                let (Some(name), Some(id)) = (name, id) else {
                    return Err(GatewayError::Malformed("tool call without id or function name".into()));
                };
                let arguments = match c.pointer("/function/arguments") {
                    Some(Value::String(s)) => s.clone(),
                    Some(Value::Null) | None => String::new(),
                    Some(other) => other.to_string(),
                };
                out.push(ToolCall { id: id.to_string(), name: name.to_string(), arguments });
            }
            Payload::ToolCalls(out)
        }
        None => match message.get("content") {
            Some(Value::String(s)) => Payload::Content(s.clone()),
            _ => return Err(GatewayError::Malformed("message has neither content nor tool calls".into())),
        },
    };
    Ok(AssistantResponse { payload, usage })
}

fn extension(media_type: &str) -> &'static str {
    match media_type {
        "audio/wav" => "wav",
        "audio/webm" => "webm",
        _ => "ogg",
    }
}

#[async_trait]
impl LlmBackend for OpenAiGateway {
    fn name(&self) -> &str {
        "openai"
    }

    async fn chat(&self, messages: &[ChatMessage], tools: &Value) -> Result<AssistantResponse> {
        check_chat_request(messages)?;
        let url = self.cfg.endpoint("chat/completions");
        let body = chat_body(&self.cfg.chat_model, messages, tools);
        let text = self.send(|| self.http.post(&url).json(&body)).await?;
        parse_chat_response(&text)
    }

    async fn transcribe(&self, audio: &[u8], media_type: &str, language: Option<&str>) -> Result<String> {
        let media = check_audio(audio, media_type)?;
        let url = self.cfg.endpoint("audio/transcriptions");
        let make = || {
            let part = Part::bytes(audio.to_vec())
                .file_name(format!("speech.{}", extension(media)))
                .mime_str(media)
                .expect("static media type is valid");
            let mut form = Form::new().part("file", part).text("model", self.cfg.transcription_model.clone());
            if let Some(lang) = language {
                form = form.text("language", lang.to_string());
            }
            self.http.post(&url).multipart(form)
        };
        let text = self.send(make).await?;
        let v: Value =
            serde_json::from_str(&text).map_err(|e| GatewayError::Malformed(format!("not JSON: {e}")))?;
        v.get("text")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| GatewayError::Malformed("transcription without `text`".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_body_shape() {
        let call = ToolCall { id: "c1".into(), name: "createTimer".into(), arguments: "{}".into() };
        let msgs = vec![
            ChatMessage::system("sys"),
            ChatMessage::user("make a timer"),
            ChatMessage::assistant_tool_calls(vec![call]),
            ChatMessage::tool("c1", "timer T;"),
        ];
        let body = chat_body("o4-mini", &msgs, &json!([]));
        assert!(body.get("tools").is_none());
        assert_eq!(body["messages"][2]["content"], Value::Null);
        assert_eq!(body["messages"][2]["tool_calls"][0]["type"], "function");
        assert_eq!(body["messages"][3]["tool_call_id"], "c1");
        assert_eq!(chat_body("m", &msgs, &json!([{"type": "function"}]))["tools"][0]["type"], "function");
    }

    #[test]
    fn response_parsing() {
        let r = parse_chat_response(r#"{"choices":[{"message":{"content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1,"total_tokens":4}}"#).unwrap();
        assert_eq!(r.payload, Payload::Content("hi".into()));
        assert_eq!(r.usage.unwrap().total_tokens, 4);
        let r = parse_chat_response(
            r#"{"choices":[{"message":{"content":null,"tool_calls":[{"id":"a","type":"function","function":{"name":"f","arguments":"{\"x\":1}"}}]}}]}"#,
        )
        .unwrap();
        assert_eq!(
            r.payload,
            Payload::ToolCalls(vec![ToolCall { id: "a".into(), name: "f".into(), arguments: "{\"x\":1}".into() }])
        );
        for bad in ["nope", "{}", r#"{"choices":[{"message":{}}]}"#] {
            assert_eq!(parse_chat_response(bad).unwrap_err().kind(), crate::ErrorKind::Malformed);
        }
    }
}
