use forge_core::Diagnostic;

/// Default system prompt sent at the start of every turn.
pub const SYSTEM_PROMPT: &str = "\
You are a modeling assistant for Lingua Franca, a coordination language for reactive systems.
You edit one textual model per session. The supported subset contains:
- a target declaration such as `target C;`
- reactor definitions, one of which is `main reactor`
- parameters, inputs, outputs, timers, state variables
- reactions `reaction(triggers) -> effects {= host code =}`
- instantiations `name = new Class(args);` and connections `a.out -> b.in;`
Time values carry a unit (ns, us, ms, s, sec, second, seconds, minute, minutes, hour, hours) unless they are 0.

Use the provided tools whenever you are unsure about the exact syntax of an element.
Each tool returns a syntactically correct snippet that you can place in the model.
`getCurrentModel` and `getDiagnostics` report the current state of the session.

When you are done, reply with the complete updated model in a single fenced code block.
Do not omit unchanged parts of the model.";

/// User message for one turn: the request followed by the current model.
pub fn user_message(prompt: &str, model_text: &str) -> String {
    let model = if model_text.trim().is_empty() { "(empty)\n".to_string() } else { fenced(model_text) };
    format!("{}\n\nCurrent model:\n{model}", prompt.trim())
}

/// Follow-up message asking for one repair attempt.
pub fn repair_message(diagnostics: &[Diagnostic]) -> String {
    let mut out = String::from("The model you returned has errors:\n");
    for d in diagnostics {
        out.push_str(&format!("- {}:{}: [{}] {}\n", d.range.line + 1, d.range.col + 1, d.code, d.message));
    }
    out.push_str("\nReply with the corrected complete model in a single fenced code block.");
    out
}

fn fenced(text: &str) -> String {
    let body = text.trim_end_matches('\n');
    format!("```lf\n{body}\n```\n")
}

/// Picks the model text out of an assistant reply.
///
/// The largest fenced block wins, the first on ties. Without fences the
/// whole reply is the model.
pub fn extract_model_text(content: &str) -> String {
    let mut best: Option<String> = None;
    let mut current: Option<Vec<&str>> = None;
    for line in content.lines() {
        let is_fence = line.trim_start().starts_with("```");
        match current.as_mut() {
            None if is_fence => current = Some(Vec::new()),
            None => {}
            Some(_) if is_fence && line.trim() == "```" => {
                let block = current.take().unwrap_or_default().join("\n");
                if best.as_ref().is_none_or(|b| block.len() > b.len()) {
                    best = Some(block);
                }
            }
            Some(lines) => lines.push(line),
        }
    }
    match best {
        Some(block) => block.trim_matches('\n').to_string(),
        None => content.trim().to_string(),
    }
}
