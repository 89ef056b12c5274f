use forge_llm::{
    ChatMessage, ErrorKind, LlmBackend, Payload, Script, ScriptResponse, ScriptToolCall, ScriptTurn, ScriptedMock,
};
use serde_json::json;

fn script() -> Script {
    Script::from_json(
        r#"{
          "turns": [
            {"expect_user_contains": "timer",
             "respond": {"tool_calls": [{"name": "createTimer",
                                         "arguments": {"name": "T", "offset": "100 ms", "period": "1 s"}}]}},
            {"expect_tool_results": ["timer T(100 ms, 1 s);"],
             "respond": {"content": "```lf\ntarget C;\nmain reactor {\n    timer T(100 ms, 1 s);\n}\n```"}}
          ],
          "transcripts": {"ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad": "add a timer"}
        }"#,
    )
    .unwrap()
}

fn base() -> Vec<ChatMessage> {
    vec![ChatMessage::system("sys"), ChatMessage::user("please add a timer T")]
}

#[tokio::test]
async fn replays_tool_round_in_order() {
    let mock = ScriptedMock::new(script());
    let mut msgs = base();
    let first = mock.chat(&msgs, &json!([])).await.unwrap();
    let Payload::ToolCalls(calls) = first.payload else { panic!("expected tool calls") };
    assert_eq!(calls[0].id, "call_1_1");
    let args: serde_json::Value = serde_json::from_str(&calls[0].arguments).unwrap();
    assert_eq!(args["offset"], "100 ms");
    msgs.push(ChatMessage::assistant_tool_calls(calls.clone()));
    msgs.push(ChatMessage::tool(&calls[0].id, "timer T(100 ms, 1 s);"));
    let second = mock.chat(&msgs, &json!([])).await.unwrap();
    assert!(matches!(second.payload, Payload::Content(ref c) if c.contains("timer T(100 ms, 1 s);")));
    assert_eq!(mock.remaining(), 0);
    let err = mock.chat(&msgs, &json!([])).await.unwrap_err();
    assert_eq!(err.kind(), ErrorKind::ScriptExhausted);
}

#[tokio::test]
async fn empty_script_is_exhausted_immediately() {
    let mock = ScriptedMock::new(Script::default());
    assert_eq!(mock.chat(&base(), &json!([])).await.unwrap_err().kind(), ErrorKind::ScriptExhausted);
}

#[tokio::test]
async fn wrong_tool_result_reports_a_diff() {
    let mock = ScriptedMock::new(script());
    let mut msgs = base();
    mock.chat(&msgs, &json!([])).await.unwrap();
    msgs.push(ChatMessage::tool("call_1_1", "timer T;"));
    let err = mock.chat(&msgs, &json!([])).await.unwrap_err();
    assert_eq!(err.kind(), ErrorKind::ScriptMismatch);
    let text = err.to_string();
    assert!(text.contains("- timer T(100 ms, 1 s);") && text.contains("+ timer T;"), "{text}");
    assert_eq!(mock.position(), 1);
}

#[tokio::test]
async fn unexpected_user_text_is_a_mismatch() {
    let mock = ScriptedMock::new(script());
    let msgs = vec![ChatMessage::system("s"), ChatMessage::user("draw a boiler")];
    assert_eq!(mock.chat(&msgs, &json!([])).await.unwrap_err().kind(), ErrorKind::ScriptMismatch);
}

#[tokio::test]
async fn identical_calls_give_identical_responses() {
    let (a, b) = (ScriptedMock::new(script()), ScriptedMock::new(script()));
    assert_eq!(a.chat(&base(), &json!([])).await.unwrap(), b.chat(&base(), &json!([])).await.unwrap());
}

#[tokio::test]
async fn transcripts_are_keyed_by_audio_hash() {
    let mock = ScriptedMock::new(script());
    assert_eq!(Script::audio_key(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    assert_eq!(mock.transcribe(b"abc", "audio/webm", None).await.unwrap(), "add a timer");
    assert_eq!(mock.transcribe(b"abd", "audio/webm", None).await.unwrap_err().kind(), ErrorKind::ScriptMismatch);
    assert_eq!(mock.transcribe(b"abc", "text/plain", None).await.unwrap_err().kind(), ErrorKind::UnsupportedMedia);
}

#[test]
fn script_round_trips_through_json() {
    let s = Script {
        turns: vec![ScriptTurn {
            expect_user_contains: None,
            expect_tool_results: None,
            respond: ScriptResponse {
                tool_calls: Some(vec![ScriptToolCall { id: None, name: "getCurrentModel".into(), arguments: json!({}) }]),
                content: None,
            },
        }],
        transcripts: Default::default(),
    };
    let text = serde_json::to_string(&s).unwrap();
    assert_eq!(Script::from_json(&text).unwrap(), s);
}
