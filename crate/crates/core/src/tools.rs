//! Tool registry and executor. Failures are returned to the caller as
//! ordinary error results so a chat loop can keep going.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::diagnostic::Diagnostic;
use crate::lf;
use crate::toolgen::{
    ArgValue, GeneratedTools, JsonType, ParamSpec, Returns, SlotKind, SyntaxTemplate, TemplateEntry,
    ToolSchema,
};

pub const GET_CURRENT_MODEL: &str = "getCurrentModel";
pub const GET_DIAGNOSTICS: &str = "getDiagnostics";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCall {
    pub id: String,
    pub name: String,
    /// JSON object text as produced by the model.
    pub arguments: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolResult {
    pub call_id: String,
    pub content: String,
    pub is_error: bool,
}

/// Read-only session state visible to introspection tools.
#[derive(Debug, Clone, Copy)]
pub struct SessionView<'a> {
    pub model_text: &'a str,
    pub diagnostics: &'a [Diagnostic],
}

impl SessionView<'_> {
    pub fn empty() -> SessionView<'static> {
        SessionView { model_text: "", diagnostics: &[] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    CurrentModel,
    Diagnostics,
}

#[derive(Debug, Clone)]
enum Executor {
    Template(SyntaxTemplate),
    Builtin(Builtin),
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("tool `{0}` is already registered")]
    Duplicate(String),
    #[error("template slot `{slot}` of `{tool}` has no matching parameter")]
    UnknownSlot { tool: String, slot: String },
    #[error("invalid tools file: {0}")]
    InvalidTools(String),
    #[error("invalid templates file: {0}")]
    InvalidTemplates(String),
}

#[derive(Debug, Clone, Default)]
pub struct ToolRegistry {
    entries: Vec<(ToolSchema, Executor)>,
}

impl ToolRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every generated tool followed by the built-ins.
    pub fn from_generated(generated: &GeneratedTools) -> Result<Self, RegistryError> {
        let mut reg = ToolRegistry::new();
        for (schema, template) in &generated.tools {
            reg.register(schema.clone(), template.clone())?;
        }
        reg.register_builtins()?;
        Ok(reg)
    }

    pub fn register(&mut self, schema: ToolSchema, template: SyntaxTemplate) -> Result<(), RegistryError> {
        if self.get(&schema.name).is_some() {
            return Err(RegistryError::Duplicate(schema.name));
        }
        for slot in template.slot_names() {
            if schema.param(&slot).is_none() {
                return Err(RegistryError::UnknownSlot { tool: schema.name.clone(), slot });
            }
        }
        self.entries.push((schema, Executor::Template(template)));
        Ok(())
    }

    pub fn register_builtins(&mut self) -> Result<(), RegistryError> {
        for (name, description, returns, builtin) in [
            (
                GET_CURRENT_MODEL,
                "Returns the current Lingua Franca model of the session as text.",
                "The current model text, empty if there is none.",
                Builtin::CurrentModel,
            ),
            (
                GET_DIAGNOSTICS,
                "Returns the diagnostics of the last validation of the model as a JSON array.",
                "A JSON array of diagnostics with severity, code, message and range.",
                Builtin::Diagnostics,
            ),
        ] {
            if self.get(name).is_some() {
                return Err(RegistryError::Duplicate(name.to_string()));
            }
            let schema = ToolSchema {
                name: name.to_string(),
                description: description.to_string(),
                parameters: Vec::new(),
                returns: Returns { type_name: "string".into(), description: returns.into() },
            };
            self.entries.push((schema, Executor::Builtin(builtin)));
        }
        Ok(())
    }

    /// Builds a registry from a `tools.json` array and its `templates.json`
    /// sidecar, then adds the built-ins.
    pub fn load(tools_json: &str, templates_json: &str) -> Result<Self, RegistryError> {
        let tools: Vec<Value> =
            serde_json::from_str(tools_json).map_err(|e| RegistryError::InvalidTools(e.to_string()))?;
        let templates: HashMap<String, TemplateEntry> = serde_json::from_str(templates_json)
            .map_err(|e| RegistryError::InvalidTemplates(e.to_string()))?;
        let mut reg = ToolRegistry::new();
        for wire in &tools {
            let (name, description, params) = parse_wire(wire).map_err(RegistryError::InvalidTools)?;
            let entry = templates
                .get(&name)
                .ok_or_else(|| RegistryError::InvalidTemplates(format!("no template for `{name}`")))?;
            let parameters = params
                .into_iter()
                .map(|(pname, json_type, description, optional)| ParamSpec {
                    kind: entry.template.kinds.get(&pname).copied().unwrap_or(SlotKind::Text),
                    name: pname,
                    json_type,
                    description,
                    optional,
                })
                .collect();
            let schema = ToolSchema { name, description, parameters, returns: entry.returns.clone() };
            reg.register(schema, entry.template.clone())?;
        }
        reg.register_builtins()?;
        Ok(reg)
    }

    pub fn get(&self, name: &str) -> Option<&ToolSchema> {
        self.entries.iter().map(|(s, _)| s).find(|s| s.name == name)
    }

    pub fn template(&self, name: &str) -> Option<&SyntaxTemplate> {
        self.entries.iter().find(|(s, _)| s.name == name).and_then(|(_, e)| match e {
            Executor::Template(t) => Some(t),
            Executor::Builtin(_) => None,
        })
    }

    pub fn schemas(&self) -> impl Iterator<Item = &ToolSchema> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Wire-format tool definitions in registration order.
    pub fn list_tools(&self) -> Value {
        Value::Array(self.entries.iter().map(|(s, _)| s.to_wire()).collect())
    }

    pub fn execute(&self, call: &ToolCall, view: SessionView<'_>) -> ToolResult {
        let outcome = self.run(call, view);
        let (content, is_error) = match outcome {
            Ok(c) => (c, false),
            Err(e) => (e, true),
        };
        ToolResult { call_id: call.id.clone(), content, is_error }
    }

    fn run(&self, call: &ToolCall, view: SessionView<'_>) -> Result<String, String> {
        let Some((schema, executor)) = self.entries.iter().find(|(s, _)| s.name == call.name) else {
            let names: Vec<&str> = self.schemas().map(|s| s.name.as_str()).collect();
            return Err(format!("unknown tool: {}. Available tools: {}", call.name, names.join(", ")));
        };
        let raw = if call.arguments.trim().is_empty() { "{}" } else { call.arguments.as_str() };
        let parsed: Value =
            serde_json::from_str(raw).map_err(|e| format!("invalid JSON arguments: {e}"))?;
        let Value::Object(obj) = parsed else {
            return Err("arguments must be a JSON object".into());
        };
        match executor {
            Executor::Builtin(Builtin::CurrentModel) => Ok(view.model_text.to_string()),
            Executor::Builtin(Builtin::Diagnostics) => {
                Ok(serde_json::to_string(view.diagnostics).expect("diagnostics serialize"))
            }
            Executor::Template(template) => {
                let args = check_arguments(schema, &obj)?;
                let text = template.render(&args).map_err(|e| e.to_string())?;
                if let Some(construct) = template.produces {
                    match lf::parse_snippet(&text) {
                        Ok(s) if construct.matches(&s) => {}
                        _ => return Err(format!("generated syntax does not parse: {text}")),
                    }
                }
                Ok(text)
            }
        }
    }
}

/// (name, json type, description, optional) of one wire parameter.
type WireParam = (String, JsonType, String, bool);

fn parse_wire(wire: &Value) -> Result<(String, String, Vec<WireParam>), String> {
    let f = wire.get("function").ok_or("entry without `function`")?;
    let name = f.get("name").and_then(Value::as_str).ok_or("function without `name`")?.to_string();
    let description = f.get("description").and_then(Value::as_str).unwrap_or_default().to_string();
    let params = f.get("parameters").cloned().unwrap_or(Value::Null);
    let required: Vec<&str> = params
        .get("required")
        .and_then(Value::as_array)
        .map(|r| r.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let mut out = Vec::new();
    if let Some(props) = params.get("properties").and_then(Value::as_object) {
        for (pname, prop) in props {
            let json_type = match prop.get("type").and_then(Value::as_str) {
                Some("string") => JsonType::String,
                Some("integer") => JsonType::Integer,
                Some("boolean") => JsonType::Boolean,
                Some("array") => JsonType::ArrayOfString,
                other => return Err(format!("`{name}.{pname}` has unsupported type {other:?}")),
            };
            let desc = prop.get("description").and_then(Value::as_str).unwrap_or_default().to_string();
            out.push((pname.clone(), json_type, desc, !required.contains(&pname.as_str())));
        }
    }
    Ok((name, description, out))
}

fn check_arguments(
    schema: &ToolSchema,
    obj: &serde_json::Map<String, Value>,
) -> Result<HashMap<String, ArgValue>, String> {
    if let Some(extra) = obj.keys().find(|k| schema.param(k).is_none()) {
        return Err(format!("unknown argument: {extra}"));
    }
    let mut args = HashMap::new();
    for p in &schema.parameters {
        let value = match obj.get(&p.name) {
            None | Some(Value::Null) => {
                if p.optional {
                    continue;
                }
                return Err(format!("missing required argument: {}", p.name));
            }
            Some(v) => v,
        };
        let mismatch = || format!("type mismatch: {} must be {}", p.name, type_phrase(p.json_type));
        let arg = match p.json_type {
            JsonType::String => ArgValue::Str(value.as_str().ok_or_else(mismatch)?.to_string()),
            JsonType::Integer => ArgValue::Int(value.as_i64().ok_or_else(mismatch)?),
            JsonType::Boolean => ArgValue::Str(value.as_bool().ok_or_else(mismatch)?.to_string()),
            JsonType::ArrayOfString => {
                let items = value.as_array().ok_or_else(mismatch)?;
                let strings: Option<Vec<String>> =
                    items.iter().map(|i| i.as_str().map(str::to_string)).collect();
                ArgValue::List(strings.ok_or_else(mismatch)?)
            }
        };
        let invalid = |e: String| format!("invalid argument {}: {e}", p.name);
        match &arg {
            ArgValue::Str(s) => p.kind.check(s).map_err(invalid)?,
            ArgValue::List(items) => {
                for i in items {
                    p.kind.check(i).map_err(invalid)?;
                }
            }
            ArgValue::Int(_) => {}
        }
        args.insert(p.name.clone(), arg);
    }
    Ok(args)
}

fn type_phrase(t: JsonType) -> &'static str {
    match t {
        JsonType::String => "a string",
        JsonType::Integer => "an integer",
        JsonType::Boolean => "a boolean",
        JsonType::ArrayOfString => "an array of strings",
    }
}
