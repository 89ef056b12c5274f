//! Compiles grammar rules into function-calling tool schemas paired with
//! concrete-syntax templates.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::grammar::{features_in_order, AssignOp, BodyNode, GrammarModel, Multiplicity, Rule};
use crate::lf::{self, ElementKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JsonType {
    String,
    Integer,
    ArrayOfString,
    Boolean,
}

/// Lexical category of a parameter value, derived from the grammar type name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    Identifier,
    Integer,
    Expression,
    Attribute,
    TypeName,
    Reference,
    Code,
    /// Unknown grammar type; the value is inserted unchecked.
    Text,
}

impl SlotKind {
    pub fn for_type(type_name: &str) -> SlotKind {
        match type_name {
            "ID" => SlotKind::Identifier,
            "INT" => SlotKind::Integer,
            "Expression" => SlotKind::Expression,
            "Attribute" => SlotKind::Attribute,
            "Type" => SlotKind::TypeName,
            "VarRef" | "PortRef" => SlotKind::Reference,
            "Code" => SlotKind::Code,
            _ => SlotKind::Text,
        }
    }

    /// Value used when an enclosing group renders without this slot.
    pub fn default_value(self) -> Option<&'static str> {
        match self {
            // an empty timing spec means (0, 0)
            SlotKind::Expression => Some("0"),
            _ => None,
        }
    }

    /// Checks that `value` is well formed for this kind.
    pub fn check(self, value: &str) -> Result<(), String> {
        let ok = match self {
            SlotKind::Identifier => lf::is_identifier(value),
            SlotKind::Integer => value.parse::<i64>().is_ok(),
            SlotKind::Expression => lf::parse_expr(value).is_ok(),
            SlotKind::Attribute => lf::parse_attribute(value).is_ok(),
            SlotKind::TypeName => {
                let base = value.trim_end_matches('*');
                lf::is_identifier(base)
            }
            SlotKind::Reference => {
                let mut parts = value.split('.');
                let first = parts.next().is_some_and(lf::is_identifier);
                let rest: Vec<&str> = parts.collect();
                first && rest.len() <= 1 && rest.iter().all(|p| lf::is_identifier(p))
            }
            SlotKind::Code => !value.contains("=}"),
            SlotKind::Text => true,
        };
        if ok {
            Ok(())
        } else {
            Err(match self {
                SlotKind::Identifier => format!("`{value}` is not a valid identifier"),
                SlotKind::Integer => format!("`{value}` is not an integer"),
                SlotKind::Expression => {
                    format!("`{value}` is not a valid expression; use 0 or a number with a unit such as 100 ms")
                }
                SlotKind::Attribute => format!("`{value}` is not an attribute such as @label(\"text\")"),
                SlotKind::TypeName => format!("`{value}` is not a type name"),
                SlotKind::Reference => format!("`{value}` is not a reference of the form name or instance.name"),
                SlotKind::Code => "code must not contain `=}`".to_string(),
                SlotKind::Text => unreachable!(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub json_type: JsonType,
    pub description: String,
    pub optional: bool,
    pub kind: SlotKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Returns {
    #[serde(rename = "type")]
    pub type_name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolSchema {
    pub name: String,
    pub description: String,
    pub parameters: Vec<ParamSpec>,
    pub returns: Returns,
}

impl ToolSchema {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// The `{type: "function", function: {...}}` object of a chat tools array.
    pub fn to_wire(&self) -> Value {
        let mut properties = serde_json::Map::new();
        for p in &self.parameters {
            let prop = match p.json_type {
                JsonType::ArrayOfString => json!({
                    "type": "array",
                    "items": {"type": "string"},
                    "description": p.description,
                }),
                JsonType::String => json!({"type": "string", "description": p.description}),
                JsonType::Integer => json!({"type": "integer", "description": p.description}),
                JsonType::Boolean => json!({"type": "boolean", "description": p.description}),
            };
            properties.insert(p.name.clone(), prop);
        }
        let required: Vec<&str> =
            self.parameters.iter().filter(|p| !p.optional).map(|p| p.name.as_str()).collect();
        json!({
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": required,
                },
            },
        })
    }
}

/// The language construct a template produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construct {
    Target,
    Reactor,
    Element(ElementKind),
}

impl Construct {
    pub fn for_rule(name: &str) -> Option<Construct> {
        Some(match name {
            "Target" => Construct::Target,
            "Reactor" => Construct::Reactor,
            "Input" => Construct::Element(ElementKind::Input),
            "Output" => Construct::Element(ElementKind::Output),
            "Timer" => Construct::Element(ElementKind::Timer),
            "State" | "StateVar" => Construct::Element(ElementKind::State),
            "Reaction" => Construct::Element(ElementKind::Reaction),
            "Instantiation" => Construct::Element(ElementKind::Instantiation),
            "Connection" => Construct::Element(ElementKind::Connection),
            _ => return None,
        })
    }

    pub fn matches(self, snippet: &lf::Snippet) -> bool {
        match (self, snippet) {
            (Construct::Target, lf::Snippet::Target(_)) => true,
            (Construct::Reactor, lf::Snippet::Reactor(_)) => true,
            (Construct::Element(k), lf::Snippet::Element(e)) => e.kind() == k,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplatePart {
    Literal(String),
    Slot(String),
    /// Rendered when any parameter inside it has a value left; `repeat`
    /// groups render once per remaining array item.
    OptionalGroup { parts: Vec<TemplatePart>, guard: Vec<String>, repeat: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxTemplate {
    pub parts: Vec<TemplatePart>,
    pub produces: Option<Construct>,
    /// Lexical kind of each slot, keyed by parameter name.
    pub kinds: BTreeMap<String, SlotKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Str(String),
    Int(i64),
    List(Vec<String>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ToolgenError {
    #[error("rule `{0}` has no features to parameterize")]
    NoFeatures(String),
    #[error("rule `{0}` contains alternatives; author its template manually and register it with the tool runtime")]
    Alternatives(String),
    #[error("no generatable rules")]
    NoGeneratableRules { failures: Vec<(String, String)> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("missing required argument: {0}")]
    Missing(String),
    #[error("missing argument: {param} (needed because {because} is given)")]
    MissingDependent { param: String, because: String },
}

fn lower(rule: &str) -> String {
    rule.to_lowercase()
}

fn sentences(doc: &[String]) -> Vec<String> {
    let joined = doc.join(" ");
    let chars: Vec<char> = joined.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        current.push(c);
        let boundary = matches!(c, '.' | '!' | '?')
            && chars.get(i + 1).is_some_and(|n| n.is_whitespace())
            && chars.get(i + 2).is_some_and(|n| n.is_uppercase());
        if boundary {
            out.push(current.trim().to_string());
            current.clear();
        }
        i += 1;
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

fn mentions(sentence: &str, word: &str) -> bool {
    sentence
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .any(|w| w.eq_ignore_ascii_case(word))
}

/// First doc sentence that mentions `param` as a whole word, else a generic line.
pub fn describe_param(rule: &Rule, param: &str) -> String {
    sentences(&rule.doc)
        .into_iter()
        .find(|s| mentions(s, param))
        .unwrap_or_else(|| format!("The {param} of the {}.", lower(&rule.name)))
}

pub fn generate_tool_schema(rule: &Rule) -> Result<ToolSchema, ToolgenError> {
    let features = features_in_order(rule);
    if features.is_empty() {
        return Err(ToolgenError::NoFeatures(rule.name.clone()));
    }
    let parameters = features
        .iter()
        .map(|f| {
            let kind = SlotKind::for_type(&f.type_name);
            let json_type = match (f.op, kind) {
                (AssignOp::Array, _) => JsonType::ArrayOfString,
                (AssignOp::Single, SlotKind::Integer) => JsonType::Integer,
                (AssignOp::Single, _) => JsonType::String,
            };
            ParamSpec {
                name: f.name.clone(),
                json_type,
                description: describe_param(rule, &f.name),
                optional: !f.required,
                kind,
            }
        })
        .collect();
    let what = lower(&rule.name);
    Ok(ToolSchema {
        name: format!("create{}", rule.name),
        description: format!(
            "Creates a {what} definition in concrete syntax based on the given parameters."
        ),
        parameters,
        returns: Returns {
            type_name: "string".into(),
            description: format!("The concrete syntax representation of the {what}."),
        },
    })
}

pub fn derive_template(rule: &Rule) -> Result<SyntaxTemplate, ToolgenError> {
    fn convert(rule: &str, nodes: &[BodyNode], out: &mut Vec<TemplatePart>) -> Result<(), ToolgenError> {
        for n in nodes {
            match n {
                BodyNode::Keyword(k) => out.push(TemplatePart::Literal(k.clone())),
                BodyNode::Feature { name, .. } => out.push(TemplatePart::Slot(name.clone())),
                BodyNode::Group { children, multiplicity: Multiplicity::One } => {
                    convert(rule, children, out)?
                }
                BodyNode::Group { children, multiplicity } => {
                    let mut parts = Vec::new();
                    convert(rule, children, &mut parts)?;
                    let guard = direct_slots(&parts);
                    out.push(TemplatePart::OptionalGroup {
                        parts,
                        guard,
                        repeat: *multiplicity == Multiplicity::Star,
                    });
                }
                BodyNode::Alternative(_) => return Err(ToolgenError::Alternatives(rule.to_string())),
            }
        }
        Ok(())
    }
    let mut parts = Vec::new();
    convert(&rule.name, &rule.body, &mut parts)?;
    let kinds = features_in_order(rule)
        .into_iter()
        .map(|f| (f.name, SlotKind::for_type(&f.type_name)))
        .collect();
    Ok(SyntaxTemplate { parts, produces: Construct::for_rule(&rule.name), kinds })
}

fn direct_slots(parts: &[TemplatePart]) -> Vec<String> {
    let mut out = Vec::new();
    for p in parts {
        if let TemplatePart::Slot(s) = p {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
    }
    out
}

fn all_slots(parts: &[TemplatePart], out: &mut Vec<String>) {
    for p in parts {
        match p {
            TemplatePart::Slot(s) => out.push(s.clone()),
            TemplatePart::OptionalGroup { parts, .. } => all_slots(parts, out),
            TemplatePart::Literal(_) => {}
        }
    }
}

struct RenderState<'a> {
    args: &'a HashMap<String, ArgValue>,
    kinds: &'a BTreeMap<String, SlotKind>,
    cursors: HashMap<String, usize>,
    used: HashSet<String>,
    tokens: Vec<String>,
}

impl RenderState<'_> {
    fn available(&self, name: &str) -> bool {
        match self.args.get(name) {
            Some(ArgValue::List(items)) => self.cursors.get(name).copied().unwrap_or(0) < items.len(),
            Some(_) => !self.used.contains(name),
            None => false,
        }
    }

    fn render(&mut self, parts: &[TemplatePart], trigger: Option<&str>) -> Result<(), RenderError> {
        for part in parts {
            match part {
                TemplatePart::Literal(l) => self.tokens.push(l.clone()),
                TemplatePart::Slot(name) => {
                    let kind = self.kinds.get(name).copied().unwrap_or(SlotKind::Text);
                    let value = match self.args.get(name) {
                        Some(ArgValue::List(items)) => {
                            let cursor = self.cursors.entry(name.clone()).or_insert(0);
                            let item = items.get(*cursor).cloned();
                            *cursor += 1;
                            item
                        }
                        Some(ArgValue::Str(s)) if !self.used.contains(name) => Some(s.clone()),
                        Some(ArgValue::Int(i)) if !self.used.contains(name) => Some(i.to_string()),
                        _ => None,
                    };
                    self.used.insert(name.clone());
                    let value = match (value, kind.default_value(), trigger) {
                        (Some(v), _, _) => v,
                        (None, Some(d), Some(_)) => d.to_string(),
                        (None, _, Some(t)) => {
                            return Err(RenderError::MissingDependent {
                                param: name.clone(),
                                because: t.to_string(),
                            })
                        }
                        (None, _, None) => return Err(RenderError::Missing(name.clone())),
                    };
                    self.tokens.push(match kind {
                        SlotKind::Code => format!("{{={value}=}}"),
                        _ => value,
                    });
                }
                TemplatePart::OptionalGroup { parts, guard, repeat } => {
                    let mut inside = Vec::new();
                    all_slots(parts, &mut inside);
                    if guard.is_empty() && inside.is_empty() {
                        self.render(parts, trigger)?;
                        continue;
                    }
                    while let Some(t) = inside.iter().find(|s| self.available(s)).cloned() {
                        self.render(parts, Some(&t))?;
                        if !repeat {
                            break;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl SyntaxTemplate {
    pub fn slot_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        all_slots(&self.parts, &mut out);
        out.dedup();
        out
    }

    /// Renders the template. Argument values are inserted as given; check
    /// them with [`SlotKind::check`] first.
    pub fn render(&self, args: &HashMap<String, ArgValue>) -> Result<String, RenderError> {
        let mut state = RenderState {
            args,
            kinds: &self.kinds,
            cursors: HashMap::new(),
            used: HashSet::new(),
            tokens: Vec::new(),
        };
        state.render(&self.parts, None)?;
        Ok(join_tokens(&state.tokens))
    }
}

/// Joins tokens with single spaces, except around `( ) , ; : .`.
fn join_tokens(tokens: &[String]) -> String {
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for t in tokens {
        if let Some(p) = prev {
            let tight_before = matches!(t.as_str(), "(" | ")" | "," | ";" | ":" | ".");
            let tight_after = matches!(p, "(" | ".");
            if !tight_before && !tight_after {
                out.push(' ');
            }
        }
        out.push_str(t);
        prev = Some(t);
    }
    out
}

#[derive(Debug, Clone)]
pub struct GeneratedTools {
    pub tools: Vec<(ToolSchema, SyntaxTemplate)>,
    /// (rule name, reason) for rules with features that failed to compile.
    pub failures: Vec<(String, String)>,
}

/// One tool per rule with at least one feature, in source order.
pub fn generate_all(grammar: &GrammarModel) -> Result<GeneratedTools, ToolgenError> {
    let mut tools = Vec::new();
    let mut failures = Vec::new();
    for rule in &grammar.rules {
        let schema = match generate_tool_schema(rule) {
            Ok(s) => s,
            Err(ToolgenError::NoFeatures(_)) => continue,
            Err(e) => {
                failures.push((rule.name.clone(), e.to_string()));
                continue;
            }
        };
        match derive_template(rule) {
            Ok(t) => tools.push((schema, t)),
            Err(e) => failures.push((rule.name.clone(), e.to_string())),
        }
    }
    if tools.is_empty() {
        return Err(ToolgenError::NoGeneratableRules { failures });
    }
    Ok(GeneratedTools { tools, failures })
}

/// Sidecar entry stored in `templates.json` next to the wire tool array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateEntry {
    pub returns: Returns,
    #[serde(flatten)]
    pub template: SyntaxTemplate,
}

impl GeneratedTools {
    /// The `tools.json` array.
    pub fn tools_json(&self) -> Value {
        Value::Array(self.tools.iter().map(|(s, _)| s.to_wire()).collect())
    }

    /// The `templates.json` object, keyed by function name.
    pub fn templates_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        for (schema, template) in &self.tools {
            let entry = TemplateEntry { returns: schema.returns.clone(), template: template.clone() };
            map.insert(schema.name.clone(), serde_json::to_value(entry).expect("serializable"));
        }
        Value::Object(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    const FIXTURE: &str = include_str!("../fixtures/linguafranca-subset.fg");

    fn timer_rule() -> Rule {
        parse_grammar(FIXTURE).unwrap().rule("Timer").unwrap().clone()
    }

    fn args(pairs: &[(&str, &str)]) -> HashMap<String, ArgValue> {
        pairs.iter().map(|(k, v)| (k.to_string(), ArgValue::Str(v.to_string()))).collect()
    }

    #[test]
    fn timer_schema_shape() {
        let s = generate_tool_schema(&timer_rule()).unwrap();
        assert_eq!(s.name, "createTimer");
        assert_eq!(
            s.description,
            "Creates a timer definition in concrete syntax based on the given parameters."
        );
        let shape: Vec<(&str, bool, JsonType)> =
            s.parameters.iter().map(|p| (p.name.as_str(), p.optional, p.json_type)).collect();
        assert_eq!(
            shape,
            vec![
                ("attributes", true, JsonType::ArrayOfString),
                ("name", false, JsonType::String),
                ("offset", true, JsonType::String),
                ("period", true, JsonType::String),
            ]
        );
        assert_eq!(s.param("name").unwrap().description, "The name of the timer.");
        assert_eq!(s.returns.description, "The concrete syntax representation of the timer.");
    }

    #[test]
    fn single_feature_rule() {
        let g = parse_grammar("X: 'x' a=ID;").unwrap();
        let s = generate_tool_schema(&g.rules[0]).unwrap();
        assert_eq!(s.name, "createX");
        assert_eq!(s.parameters.len(), 1);
        assert!(!s.parameters[0].optional);
        assert_eq!(s.parameters[0].json_type, JsonType::String);
        assert_eq!(s.parameters[0].description, "The a of the x.");
    }

    #[test]
    fn featureless_rule_is_an_error() {
        let g = parse_grammar("K: 'k' ';';").unwrap();
        assert_eq!(generate_tool_schema(&g.rules[0]), Err(ToolgenError::NoFeatures("K".into())));
    }

    #[test]
    fn doc_sentences_map_to_params() {
        let g = parse_grammar(
            "// A timer with documented parameters.\n\
             // The offset before the first trigger. Default is 0 (NOW).\n\
             // The period between subsequent triggers. Default is 0 (ONCE).\n\
             Timer: 'timer' name=ID ('(' offset=Expression (',' period=Expression)? ')')?;",
        )
        .unwrap();
        let s = generate_tool_schema(&g.rules[0]).unwrap();
        // expected mapping written down before running the heuristic
        let expected = [
            ("name", "The name of the timer."),
            ("offset", "The offset before the first trigger."),
            ("period", "The period between subsequent triggers."),
        ];
        for (param, desc) in expected {
            assert_eq!(s.param(param).unwrap().description, desc, "{param}");
        }
    }

    #[test]
    fn sentence_split_keeps_abbreviations() {
        let doc = vec!["Can be empty. E.g. (0) or (NOW)".to_string(), "The latter means x.".to_string()];
        assert_eq!(sentences(&doc), vec!["Can be empty.", "E.g. (0) or (NOW) The latter means x."]);
    }

    #[test]
    fn timer_template_renders() {
        let t = derive_template(&timer_rule()).unwrap();
        assert_eq!(t.render(&args(&[("name", "T"), ("offset", "100 ms"), ("period", "1 s")])).unwrap(), "timer T(100 ms, 1 s);");
        assert_eq!(t.render(&args(&[("name", "T")])).unwrap(), "timer T;");
        assert_eq!(t.render(&args(&[("name", "T"), ("offset", "0")])).unwrap(), "timer T(0);");
        assert_eq!(t.render(&args(&[("name", "T"), ("period", "2 s")])).unwrap(), "timer T(0, 2 s);");
        let mut with_attrs = args(&[("name", "T")]);
        with_attrs.insert(
            "attributes".into(),
            ArgValue::List(vec!["@label(\"a\")".into(), "@icon(\"b\")".into()]),
        );
        assert_eq!(t.render(&with_attrs).unwrap(), "@label(\"a\") @icon(\"b\") timer T;");
        assert_eq!(t.render(&HashMap::new()), Err(RenderError::Missing("name".into())));
    }

    #[test]
    fn omitted_group_still_parses() {
        let t = derive_template(&timer_rule()).unwrap();
        let text = t.render(&args(&[("name", "T")])).unwrap();
        assert!(matches!(lf::parse_element(&text), Ok(lf::Element::Timer(_))));
    }

    #[test]
    fn reaction_lists_render_with_separators() {
        let g = parse_grammar(FIXTURE).unwrap();
        let t = derive_template(g.rule("Reaction").unwrap()).unwrap();
        let mut a = HashMap::new();
        a.insert("triggers".to_string(), ArgValue::List(vec!["t".into(), "x.y".into(), "startup".into()]));
        a.insert("effects".to_string(), ArgValue::List(vec!["out".into()]));
        a.insert("body".to_string(), ArgValue::Str(" go(); ".into()));
        assert_eq!(t.render(&a).unwrap(), "reaction(t, x.y, startup) -> out {= go(); =}");
        a.remove("effects");
        a.insert("triggers".to_string(), ArgValue::List(vec![]));
        assert_eq!(t.render(&a).unwrap(), "reaction() {= go(); =}");
    }

    #[test]
    fn alternatives_have_no_template() {
        let g = parse_grammar("A: 'x' b=ID | 'y' c=INT;").unwrap();
        assert_eq!(derive_template(&g.rules[0]), Err(ToolgenError::Alternatives("A".into())));
        let s = generate_tool_schema(&g.rules[0]).unwrap();
        assert!(s.parameters.iter().all(|p| p.optional));
        assert_eq!(s.param("c").unwrap().json_type, JsonType::Integer);
    }

    #[test]
    fn fixture_generates_eight_tools() {
        let g = parse_grammar(FIXTURE).unwrap();
        let out = generate_all(&g).unwrap();
        let names: Vec<&str> = out.tools.iter().map(|(s, _)| s.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "createTarget",
                "createReactor",
                "createInput",
                "createOutput",
                "createTimer",
                "createReaction",
                "createInstantiation",
                "createConnection"
            ]
        );
        assert!(out.failures.is_empty());
    }

    #[test]
    fn generate_all_reports_failures() {
        let g = parse_grammar("A: 'x' b=ID | 'y';\nB: 'b' n=ID;\nK: 'k';").unwrap();
        let out = generate_all(&g).unwrap();
        assert_eq!(out.tools.len(), 1);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].0, "A");
        let none = parse_grammar("K: 'k';").unwrap();
        assert_eq!(generate_all(&none).unwrap_err().to_string(), "no generatable rules");
        assert!(generate_all(&GrammarModel { rules: vec![] }).is_err());
    }

    #[test]
    fn wire_shape() {
        let s = generate_tool_schema(&timer_rule()).unwrap();
        let w = s.to_wire();
        assert_eq!(w["type"], "function");
        assert_eq!(w["function"]["name"], "createTimer");
        assert_eq!(w["function"]["parameters"]["type"], "object");
        assert_eq!(w["function"]["parameters"]["required"], json!(["name"]));
        assert_eq!(w["function"]["parameters"]["properties"]["attributes"]["type"], "array");
        assert_eq!(w["function"]["parameters"]["properties"]["attributes"]["items"]["type"], "string");
    }

    #[test]
    fn slot_kind_checks() {
        assert!(SlotKind::Identifier.check("T").is_ok());
        assert!(SlotKind::Identifier.check("timer").is_err());
        assert!(SlotKind::Identifier.check("a b").is_err());
        assert!(SlotKind::Expression.check("100 ms").is_ok());
        assert!(SlotKind::Expression.check("100 msec").is_err());
        assert!(SlotKind::Reference.check("a.b").is_ok());
        assert!(SlotKind::Reference.check("a.b.c").is_err());
        assert!(SlotKind::TypeName.check("char**").is_ok());
        assert!(SlotKind::Code.check("x =} y").is_err());
        assert!(SlotKind::Attribute.check("@label(\"x\")").is_ok());
        assert!(SlotKind::Attribute.check("label").is_err());
    }
}
