//! The modeling workbench: sessions that turn prompts into Lingua Franca
//! models and diagrams, served over HTTP and driven from the command line.

pub mod cli;
pub mod orchestrator;
pub mod prompt;
pub mod service;
pub mod session;
pub mod store;

use std::path::{Path, PathBuf};

use forge_core::grammar::parse_grammar;
use forge_core::toolgen::generate_all;
use forge_core::tools::ToolRegistry;

pub use orchestrator::{run_tool_loop, BackendFactory, Workbench, WorkbenchError};
pub use session::{Session, SessionConfig, TurnRecord};

/// Grammar of the supported Lingua Franca subset.
pub const FIXTURE_GRAMMAR: &str = include_str!("../../core/fixtures/linguafranca-subset.fg");

/// Registry generated from the built-in grammar.
pub fn builtin_registry() -> ToolRegistry {
    let grammar = parse_grammar(FIXTURE_GRAMMAR).expect("built-in grammar parses");
    let generated = generate_all(&grammar).expect("built-in grammar yields tools");
    ToolRegistry::from_generated(&generated).expect("built-in tools register")
}

/// `templates.json` next to a `tools.json`.
pub fn templates_path(tools: &Path) -> PathBuf {
    tools.with_file_name("templates.json")
}

/// Loads `tools.json` and its template sidecar. Errors name the offending file.
pub fn load_registry(tools: &Path, templates: Option<&Path>) -> anyhow::Result<ToolRegistry> {
    let templates = templates.map(Path::to_path_buf).unwrap_or_else(|| templates_path(tools));
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", p.display()));
    let (tools_text, templates_text) = (read(tools)?, read(&templates)?);
    ToolRegistry::load(&tools_text, &templates_text).map_err(|e| {
        let file = match e {
            forge_core::tools::RegistryError::InvalidTemplates(_) => &templates,
            _ => tools,
        };
        anyhow::anyhow!("invalid tools file {}: {e}", file.display())
    })
}
