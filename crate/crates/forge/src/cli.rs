use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use forge_core::diagram::{render_json, render_svg, synthesize_with, SynthesisConfig};
use forge_core::grammar::parse_grammar;
use forge_core::layout::{layout, LayoutConfig};
use forge_core::lf;
use forge_core::toolgen::generate_all;
use forge_core::{Diagnostic, Severity};
use forge_llm::{GatewayConfig, LlmBackend, OpenAiGateway, Script, ScriptedMock};

use crate::orchestrator::{BackendFactory, Workbench};
use crate::service::{router, ServiceOptions};
use crate::session::{SessionConfig, TurnRecord, TurnStatus};

#[derive(Debug, Parser)]
#[command(name = "forge", version, about = "Speech- and text-driven Lingua Franca modeling workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svg,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate tools.json and templates.json from a grammar.
    Toolgen {
        grammar: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Render a model as an SVG diagram or a JSON render spec.
    Render {
        model: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
        /// Levels of nested reactor contents to expand.
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Parse and validate a model, printing its diagnostics.
    Validate {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "forge-data")]
        data_dir: PathBuf,
        /// Generated tools; the built-in grammar's tools when omitted.
        #[arg(long)]
        tools: Option<PathBuf>,
        /// Template sidecar; `templates.json` next to the tools file by default.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Replay this script instead of calling an LLM service.
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long)]
        cors_origin: Option<String>,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Run prompts through a session and report each turn.
    Repl {
        #[arg(long)]
        mock: Option<PathBuf>,
        /// One prompt per line; stdin when omitted.
        #[arg(long)]
        prompts: Option<PathBuf>,
        /// Keep session files here instead of a temporary directory.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        tools: Option<PathBuf>,
        #[arg(long)]
        auto_repair: bool,
    },
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn failed(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

type CmdResult = Result<(), Failure>;

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Toolgen { grammar, out } => toolgen(&grammar, &out),
        Command::Render { model, out, format, depth } => render(&model, out.as_deref(), format, depth),
        Command::Validate { model, json } => validate(&model, json),
        Command::Serve { port, host, data_dir, tools, templates, mock, cors_origin, ui_dir } => {
            init_tracing();
            let opts = ServiceOptions { cors_origin, ui_dir };
            runtime().and_then(|rt| {
                rt.block_on(serve(&host, port, &data_dir, tools.as_deref(), templates.as_deref(), mock.as_deref(), opts))
            })
        }
        Command::Repl { mock, prompts, data_dir, tools, auto_repair } => runtime().and_then(|rt| {
            rt.block_on(repl(mock.as_deref(), prompts.as_deref(), data_dir.as_deref(), tools.as_deref(), auto_repair))
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn init_tracing() {
    let filter = tracing_subscriber::EnvFilter::try_from_env("FORGE_LOG")
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).try_init();
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Runtime::new().map_err(|e| Failure::usage(format!("cannot start runtime: {e}")))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn severity(s: Severity) -> &'static str {
    match s {
        Severity::Error => "error",
        Severity::Warning => "warning",
        Severity::Info => "info",
    }
}

/// `file:line:col: error[CODE]: message`, 1-based.
pub fn format_diagnostic(file: &Path, d: &Diagnostic) -> String {
    format!(
        "{}:{}:{}: {}[{}]: {}",
        file.display(),
        d.range.line + 1,
        d.range.col + 1,
        severity(d.severity),
        d.code,
        d.message
    )
}

fn report(file: &Path, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{}", format_diagnostic(file, d));
    }
}

fn toolgen(grammar_path: &Path, out: &Path) -> CmdResult {
    let text = read(grammar_path)?;
    let grammar = parse_grammar(&text).map_err(|d| {
        report(grammar_path, &d);
        Failure::failed(format!("{} does not parse", grammar_path.display()))
    })?;
    let generated = generate_all(&grammar).map_err(|e| Failure::failed(e.to_string()))?;
    std::fs::create_dir_all(out).map_err(|e| Failure::usage(format!("cannot create {}: {e}", out.display())))?;
    let pretty = |v| serde_json::to_string_pretty(&v).expect("JSON value serializes") + "\n";
    write(&out.join("tools.json"), &pretty(generated.tools_json()))?;
    write(&out.join("templates.json"), &pretty(generated.templates_json()))?;
    println!("wrote {} tool(s) to {}", generated.tools.len(), out.join("tools.json").display());
    for (rule, reason) in &generated.failures {
        eprintln!("{}: rule {rule}: {reason}", grammar_path.display());
    }
    if generated.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::failed(format!("{} rule(s) could not be turned into tools", generated.failures.len())))
    }
}

fn render(model_path: &Path, out: Option<&Path>, format: Format, depth: usize) -> CmdResult {
    let text = read(model_path)?;
    let model = lf::parse_model(&text).map_err(|d| {
        report(model_path, &d);
        Failure::failed(String::new())
    })?;
    let laid = layout(&synthesize_with(&model, SynthesisConfig { depth }), &LayoutConfig::default());
    let rendered = match format {
        Format::Svg => render_svg(&laid),
        Format::Json => render_json(&laid),
    };
    match out {
        Some(path) => write(path, &rendered),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn validate(model_path: &Path, json: bool) -> CmdResult {
    let text = read(model_path)?;
    let diagnostics = match lf::parse_model(&text) {
        Ok(m) => lf::validate(&m),
        Err(d) => d,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&diagnostics).expect("diagnostics serialize"));
    } else {
        for d in &diagnostics {
            println!("{}", format_diagnostic(model_path, d));
        }
    }
    let errors = diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        return Err(Failure::failed(format!("{errors} error(s)")));
    }
    if !json {
        println!("{}: ok", model_path.display());
    }
    Ok(())
}

fn registry(tools: Option<&Path>, templates: Option<&Path>) -> Result<forge_core::tools::ToolRegistry, Failure> {
    match tools {
        Some(path) => crate::load_registry(path, templates).map_err(|e| Failure::usage(e.to_string())),
        None => Ok(crate::builtin_registry()),
    }
}

fn backend_factory(mock: Option<&Path>) -> Result<BackendFactory, Failure> {
    match mock {
        Some(path) => {
            let script = Script::from_json(&read(path)?)
                .map_err(|e| Failure::usage(format!("invalid script {}: {e}", path.display())))?;
            Ok(Arc::new(move || Arc::new(ScriptedMock::new(script.clone())) as Arc<dyn LlmBackend>))
        }
        None => {
            let gateway = OpenAiGateway::new(GatewayConfig::from_env()).map_err(|e| Failure::usage(e.to_string()))?;
            let gateway: Arc<dyn LlmBackend> = Arc::new(gateway);
            Ok(Arc::new(move || gateway.clone()))
        }
    }
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

async fn serve(
    host: &str,
    port: u16,
    data_dir: &Path,
    tools: Option<&Path>,
    templates: Option<&Path>,
    mock: Option<&Path>,
    opts: ServiceOptions,
) -> CmdResult {
    let registry = registry(tools, templates)?;
    let factory = backend_factory(mock)?;
    let wb = Workbench::open(data_dir, registry, factory).map_err(|e| Failure::usage(e.to_string()))?;
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .map_err(|e| Failure::usage(format!("cannot listen on {host}:{port}: {e}")))?;
    let addr = listener.local_addr().map_err(|e| Failure::usage(e.to_string()))?;
    println!("listening on http://{addr}");
    let _ = std::io::stdout().flush();
    tracing::info!(%addr, data_dir = %data_dir.display(), mock = mock.is_some(), "service started");
    axum::serve(listener, router(Arc::new(wb), &opts))
        .with_graceful_shutdown(shutdown_signal())
        .await
        .map_err(|e| Failure::failed(format!("server error: {e}")))?;
    tracing::info!("service stopped");
    Ok(())
}

fn read_prompts(path: Option<&Path>) -> Result<Vec<String>, Failure> {
    let lines: Vec<String> = match path {
        Some(p) => read(p)?.lines().map(str::to_string).collect(),
        None => std::io::stdin()
            .lock()
            .lines()
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::usage(format!("cannot read stdin: {e}")))?,
    };
    Ok(lines.into_iter().map(|l| l.trim().to_string()).filter(|l| !l.is_empty() && !l.starts_with('#')).collect())
}

/// Per-stage timing line, network stages last.
pub fn timing_line(record: &TurnRecord) -> String {
    let mut parts = Vec::new();
    let (mut local, mut network) = (0.0, 0.0);
    for t in &record.timings {
        parts.push(format!("{} {:.2}", t.stage.as_str(), t.ms));
        if t.stage.is_network() {
            network += t.ms;
        } else {
            local += t.ms;
        }
    }
    format!("  timings (ms): {} | local {local:.2} | network {network:.2}", parts.join(", "))
}

async fn repl(
    mock: Option<&Path>,
    prompts: Option<&Path>,
    data_dir: Option<&Path>,
    tools: Option<&Path>,
    auto_repair: bool,
) -> CmdResult {
    let registry = registry(tools, None)?;
    let factory = backend_factory(mock)?;
    let prompts = read_prompts(prompts)?;
    let tmp;
    let data_dir = match data_dir {
        Some(d) => d.to_path_buf(),
        None => {
            tmp = tempfile::tempdir().map_err(|e| Failure::usage(format!("cannot create temp dir: {e}")))?;
            tmp.path().to_path_buf()
        }
    };
    let wb = Workbench::open(&data_dir, registry, factory).map_err(|e| Failure::usage(e.to_string()))?;
    let config = SessionConfig { auto_repair, ..SessionConfig::default() };
    let session = wb.create_session(config).map_err(|e| Failure::usage(e.to_string()))?;
    println!("session {}", session.id);
    let started = std::time::Instant::now();
    for prompt in &prompts {
        let record = wb.submit_prompt(&session.id, prompt).await.map_err(|e| Failure::failed(e.to_string()))?;
        let errors = record.diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
        println!(
            "turn {} {:?}: {} chat call(s), {} tool call(s), model {}, {errors} error(s)",
            record.index,
            record.status,
            record.chat_calls,
            record.tool_trace.len(),
            if record.model_updated { "updated" } else { "unchanged" },
        );
        println!("{}", timing_line(&record));
        for d in &record.diagnostics {
            println!("  {}", format_diagnostic(Path::new("model"), d));
        }
        if let Some(diagram) = &record.diagram {
            println!("  diagram: {}", wb.store().artifact_dir(&session.id).join(&diagram.svg).display());
        }
        if record.status == TurnStatus::Failed {
            let message = record.error.map(|e| e.message).unwrap_or_else(|| "turn failed".into());
            return Err(Failure::failed(format!("turn {} failed: {message}", record.index)));
        }
    }
    let total = started.elapsed().as_secs_f64() * 1000.0;
    let session = wb.session(&session.id).map_err(|e| Failure::failed(e.to_string()))?;
    println!("replayed {} turn(s) in {total:.2} ms", session.turns.len());
    println!("final model:\n{}", session.current_model_text);
    let diagnostics = match lf::parse_model(&session.current_model_text) {
        Ok(m) => lf::validate(&m),
        Err(d) => d,
    };
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        report(Path::new("model"), &diagnostics);
        return Err(Failure::failed("final model has errors"));
    }
    println!("final model validates");
    Ok(())
}
