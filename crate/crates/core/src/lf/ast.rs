use serde::{Deserialize, Serialize};

use crate::diagnostic::Span;

/// A parsed Lingua Franca program.
///
/// Equality is structural: `source_text` and spans are ignored.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub target: Option<Target>,
    pub reactors: Vec<ReactorDef>,
    pub source_text: String,
}

impl PartialEq for Model {
    fn eq(&self, other: &Model) -> bool {
        self.target == other.target && self.reactors == other.reactors
    }
}

impl Eq for Model {}

impl Model {
    pub fn main_reactor(&self) -> Option<&ReactorDef> {
        self.reactors.iter().find(|r| r.is_main)
    }

    /// Looks up a reactor by name. `main` also selects an unnamed main reactor.
    pub fn reactor(&self, name: &str) -> Option<&ReactorDef> {
        self.reactors
            .iter()
            .find(|r| r.name.as_deref() == Some(name))
            .or_else(|| {
                if name == "main" {
                    self.main_reactor()
                } else {
                    None
                }
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactorDef {
    /// Absent only for an unnamed `main reactor`.
    pub name: Option<String>,
    pub is_main: bool,
    pub params: Vec<Param>,
    pub elements: Vec<Element>,
    pub span: Span,
}

impl ReactorDef {
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("main")
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.elements.iter().filter_map(|e| match e {
            Element::Input(p) => Some(p),
            _ => None,
        })
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.elements.iter().filter_map(|e| match e {
            Element::Output(p) => Some(p),
            _ => None,
        })
    }

    pub fn reactions(&self) -> impl Iterator<Item = &Reaction> {
        self.elements.iter().filter_map(|e| match e {
            Element::Reaction(r) => Some(r),
            _ => None,
        })
    }

    pub fn instantiations(&self) -> impl Iterator<Item = &Instantiation> {
        self.elements.iter().filter_map(|e| match e {
            Element::Instantiation(i) => Some(i),
            _ => None,
        })
    }

    pub fn element_named(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name() == Some(name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub type_name: Option<String>,
    pub default: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Input(Port),
    Output(Port),
    Timer(Timer),
    State(StateVar),
    Reaction(Reaction),
    Instantiation(Instantiation),
    Connection(Connection),
}

impl Element {
    /// Name of the declared entity; reactions and connections are anonymous.
    pub fn name(&self) -> Option<&str> {
        match self {
            Element::Input(p) | Element::Output(p) => Some(&p.name),
            Element::Timer(t) => Some(&t.name),
            Element::State(s) => Some(&s.name),
            Element::Instantiation(i) => Some(&i.name),
            Element::Reaction(_) | Element::Connection(_) => None,
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Input(_) => ElementKind::Input,
            Element::Output(_) => ElementKind::Output,
            Element::Timer(_) => ElementKind::Timer,
            Element::State(_) => ElementKind::State,
            Element::Reaction(_) => ElementKind::Reaction,
            Element::Instantiation(_) => ElementKind::Instantiation,
            Element::Connection(_) => ElementKind::Connection,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Element::Input(p) | Element::Output(p) => p.span,
            Element::Timer(t) => t.span,
            Element::State(s) => s.span,
            Element::Reaction(r) => r.span,
            Element::Instantiation(i) => i.span,
            Element::Connection(c) => c.from.span.to(c.to.span),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    Input,
    Output,
    Timer,
    State,
    Reaction,
    Instantiation,
    Connection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub type_name: Option<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timer {
    pub name: String,
    /// Text of a retained `@label("...")` attribute.
    pub label: Option<String>,
    pub offset: Option<Expr>,
    pub period: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub type_name: Option<String>,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reaction {
    pub triggers: Vec<Ref>,
    pub effects: Vec<Ref>,
    pub body: HostCode,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub name: String,
    pub reactor: String,
    pub args: Vec<Assignment>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub from: Ref,
    pub to: Ref,
}

/// `name` or `container.name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ref {
    pub container: Option<String>,
    pub name: String,
    pub span: Span,
}

impl Ref {
    pub fn local(name: &str) -> Self {
        Ref { container: None, name: name.to_string(), span: Span::default() }
    }

    pub fn child(container: &str, name: &str) -> Self {
        Ref {
            container: Some(container.to_string()),
            name: name.to_string(),
            span: Span::default(),
        }
    }
}

impl std::fmt::Display for Ref {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.container {
            Some(c) => write!(f, "{}.{}", c, self.name),
            None => f.write_str(&self.name),
        }
    }
}

/// Target-language code between `{=` and `=}`, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HostCode {
    pub text: String,
}

impl HostCode {
    pub fn new(text: impl Into<String>) -> Self {
        HostCode { text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Time { value: u64, unit: TimeUnit },
    /// Decimal literal kept as written.
    Float(String),
    /// String literal contents without quotes, escapes kept as written.
    Str(String),
    Ident(String),
    Code(HostCode),
}

impl Expr {
    /// Timer offsets and periods must be `0` or carry a unit.
    pub fn is_zero_or_time(&self) -> bool {
        matches!(self, Expr::Int(0) | Expr::Time { .. })
    }
}

macro_rules! time_units {
    ($($variant:ident => $text:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum TimeUnit {
            $($variant),*
        }

        impl TimeUnit {
            pub const ALL: &'static [TimeUnit] = &[$(TimeUnit::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(TimeUnit::$variant => $text),*
                }
            }

            pub fn parse(text: &str) -> Option<TimeUnit> {
                match text {
                    $($text => Some(TimeUnit::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

time_units! {
    Nanos => "ns",
    Micros => "us",
    Millis => "ms",
    S => "s",
    Sec => "sec",
    Second => "second",
    Seconds => "seconds",
    Minute => "minute",
    Minutes => "minutes",
    Hour => "hour",
    Hours => "hours",
}

/// A single construct parsed outside of a full program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Snippet {
    Target(Target),
    Reactor(ReactorDef),
    Element(Element),
}

/// Built-in trigger names that need no declaration.
pub const BUILTIN_TRIGGERS: &[&str] = &["startup", "shutdown"];

/// Words that cannot be used as names.
pub const KEYWORDS: &[&str] = &[
    "target", "main", "reactor", "input", "output", "timer", "state", "reaction", "new",
];

pub fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&text)
}
