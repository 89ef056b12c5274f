#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use forge::{builtin_registry, BackendFactory, Workbench};
use forge_llm::{LlmBackend, Script, ScriptedMock};
use serde_json::{json, Value};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn script_file(name: &str) -> Script {
    let text = std::fs::read_to_string(fixtures().join(name).join("script.json")).unwrap();
    Script::from_json(&text).unwrap()
}

pub fn prompts_file(name: &str) -> Vec<String> {
    std::fs::read_to_string(fixtures().join(name).join("prompts.txt"))
        .unwrap()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn script(value: Value) -> Script {
    serde_json::from_value(value).unwrap()
}

/// A reply holding `model` in one fenced block.
pub fn content(model: &str) -> Value {
    json!({ "respond": { "content": format!("```lf\n{model}\n```") } })
}

pub fn mock_factory(script: Script) -> BackendFactory {
    Arc::new(move || Arc::new(ScriptedMock::new(script.clone())) as Arc<dyn LlmBackend>)
}

pub fn backend_factory(backend: Arc<dyn LlmBackend>) -> BackendFactory {
    Arc::new(move || backend.clone())
}

pub fn workbench(dir: &Path, script: Script) -> Workbench {
    Workbench::open(dir, builtin_registry(), mock_factory(script)).unwrap()
}
