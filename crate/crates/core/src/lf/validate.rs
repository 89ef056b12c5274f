//! Static checks over a parsed model. Codes LF001 to LF007 are stable.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use crate::diagnostic::{Diagnostic, LineIndex, Span};

pub const MISSING_TARGET: &str = "LF001";
pub const MAIN_REACTOR: &str = "LF002";
pub const UNKNOWN_REACTOR: &str = "LF003";
pub const BAD_CONNECTION: &str = "LF004";
pub const BAD_REFERENCE: &str = "LF005";
pub const DUPLICATE_NAME: &str = "LF006";
pub const BAD_TIME: &str = "LF007";

/// What a reference resolves to inside a reactor body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    OwnInput,
    OwnOutput,
    ChildInput,
    ChildOutput,
    Timer,
    Builtin,
    Other,
}

impl Endpoint {
    /// Data may flow out of this endpoint into the reactor body.
    pub fn is_source(self) -> bool {
        matches!(self, Endpoint::OwnInput | Endpoint::ChildOutput)
    }

    /// Data may flow from the reactor body into this endpoint.
    pub fn is_sink(self) -> bool {
        matches!(self, Endpoint::OwnOutput | Endpoint::ChildInput)
    }
}

/// Resolves `r` in the scope of `reactor`. `None` means unresolved.
pub fn resolve(model: &Model, reactor: &ReactorDef, r: &Ref) -> Option<Endpoint> {
    match &r.container {
        None => {
            if BUILTIN_TRIGGERS.contains(&r.name.as_str()) {
                return Some(Endpoint::Builtin);
            }
            reactor.element_named(&r.name).map(|e| match e {
                Element::Input(_) => Endpoint::OwnInput,
                Element::Output(_) => Endpoint::OwnOutput,
                Element::Timer(_) => Endpoint::Timer,
                _ => Endpoint::Other,
            })
        }
        Some(child) => {
            let inst = reactor.instantiations().find(|i| &i.name == child)?;
            let def = model.reactors.iter().find(|d| d.name.as_deref() == Some(&inst.reactor))?;
            match def.element_named(&r.name)? {
                Element::Input(_) => Some(Endpoint::ChildInput),
                Element::Output(_) => Some(Endpoint::ChildOutput),
                _ => Some(Endpoint::Other),
            }
        }
    }
}

/// Legal connections go from a source endpoint to a sink endpoint:
/// own input or child output on the left, own output or child input on the right.
pub fn connection_allowed(from: Endpoint, to: Endpoint) -> bool {
    from.is_source() && to.is_sink()
}

pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let index = LineIndex::new(&model.source_text);
    let mut out: Vec<(Span, &'static str, String)> = Vec::new();

    if model.target.is_none() {
        out.push((Span::default(), MISSING_TARGET, "missing mandatory target".into()));
    }

    let mains: Vec<&ReactorDef> = model.reactors.iter().filter(|r| r.is_main).collect();
    if mains.is_empty() {
        out.push((Span::default(), MAIN_REACTOR, "no main reactor declared".into()));
    }
    for extra in mains.iter().skip(1) {
        out.push((extra.span, MAIN_REACTOR, "more than one main reactor declared".into()));
    }

    let mut reactor_names = HashSet::new();
    for r in &model.reactors {
        if let Some(name) = &r.name {
            if !reactor_names.insert(name.as_str()) {
                out.push((r.span, DUPLICATE_NAME, format!("duplicate reactor name `{name}`")));
            }
        }
    }

    for r in &model.reactors {
        check_reactor(model, r, &mut out);
    }

    let mut diags: Vec<(crate::diagnostic::Range, Diagnostic)> = out
        .into_iter()
        .map(|(span, code, msg)| {
            let range = index.range(span);
            (range, Diagnostic::error(code, msg, range))
        })
        .collect();
    diags.sort_by_key(|d| (d.0.line, d.0.col));
    diags.into_iter().map(|(_, d)| d).collect()
}

fn check_reactor(model: &Model, r: &ReactorDef, out: &mut Vec<(Span, &'static str, String)>) {
    let rname = r.display_name();
    let mut names: HashMap<&str, ()> = HashMap::new();
    for p in &r.params {
        if names.insert(&p.name, ()).is_some() {
            out.push((p.span, DUPLICATE_NAME, format!("duplicate name `{}` in `{rname}`", p.name)));
        }
    }
    for e in &r.elements {
        if let Some(name) = e.name() {
            if names.insert(name, ()).is_some() {
                out.push((e.span(), DUPLICATE_NAME, format!("duplicate name `{name}` in `{rname}`")));
            }
        }
    }

    for e in &r.elements {
        match e {
            Element::Timer(t) => {
                for (what, expr) in [("offset", &t.offset), ("period", &t.period)] {
                    if let Some(x) = expr {
                        if !time_ok(r, x) {
                            out.push((
                                t.span,
                                BAD_TIME,
                                format!("timer `{}` {what} must be 0 or carry a time unit", t.name),
                            ));
                        }
                    }
                }
            }
            Element::Instantiation(i) => {
                match model.reactors.iter().find(|d| d.name.as_deref() == Some(&i.reactor)) {
                    None => out.push((
                        i.span,
                        UNKNOWN_REACTOR,
                        format!("unknown reactor `{}`", i.reactor),
                    )),
                    Some(d) if d.is_main => out.push((
                        i.span,
                        UNKNOWN_REACTOR,
                        format!("main reactor `{}` cannot be instantiated", i.reactor),
                    )),
                    Some(_) => {}
                }
            }
            Element::Connection(c) => {
                let from = resolve(model, r, &c.from);
                let to = resolve(model, r, &c.to);
                for (end, res) in [(&c.from, from), (&c.to, to)] {
                    if res.is_none() {
                        out.push((end.span, BAD_CONNECTION, format!("unresolved port `{end}`")));
                    }
                }
                if let (Some(f), Some(t)) = (from, to) {
                    if !connection_allowed(f, t) {
                        out.push((
                            c.from.span.to(c.to.span),
                            BAD_CONNECTION,
                            format!("cannot connect `{}` to `{}`", c.from, c.to),
                        ));
                    }
                }
            }
            Element::Reaction(x) => {
                for t in &x.triggers {
                    match resolve(model, r, t) {
                        None => out.push((t.span, BAD_REFERENCE, format!("unresolved trigger `{t}`"))),
                        Some(ep) if !is_trigger(ep) => out.push((
                            t.span,
                            BAD_REFERENCE,
                            format!("`{t}` cannot trigger a reaction"),
                        )),
                        Some(_) => {}
                    }
                }
                for eff in &x.effects {
                    match resolve(model, r, eff) {
                        None => {
                            out.push((eff.span, BAD_REFERENCE, format!("unresolved effect `{eff}`")))
                        }
                        Some(ep) if !ep.is_sink() => out.push((
                            eff.span,
                            BAD_REFERENCE,
                            format!("`{eff}` cannot be an effect of a reaction"),
                        )),
                        Some(_) => {}
                    }
                }
            }
            Element::Input(_) | Element::Output(_) | Element::State(_) => {}
        }
    }
}

fn is_trigger(ep: Endpoint) -> bool {
    matches!(ep, Endpoint::Timer | Endpoint::Builtin | Endpoint::OwnInput | Endpoint::ChildOutput)
}

/// `0`, a value with a unit, or a reference to a reactor parameter.
fn time_ok(r: &ReactorDef, e: &Expr) -> bool {
    match e {
        Expr::Ident(name) => r.params.iter().any(|p| &p.name == name),
        other => other.is_zero_or_time(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::parse_model;

    fn codes(src: &str) -> Vec<String> {
        validate(&parse_model(src).unwrap()).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn minimal_model_is_clean() {
        assert!(codes("target C; main reactor {}").is_empty());
    }

    #[test]
    fn missing_target() {
        let d = validate(&parse_model("main reactor {}").unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, MISSING_TARGET);
        assert_eq!(d[0].message, "missing mandatory target");
        assert!(d[0].is_error());
    }

    #[test]
    fn main_reactor_count() {
        assert_eq!(codes("target C; reactor A {}"), vec![MAIN_REACTOR]);
        assert_eq!(codes("target C; main reactor {} main reactor B {}"), vec![MAIN_REACTOR]);
    }

    #[test]
    fn unknown_and_main_instantiation() {
        assert_eq!(codes("target C; main reactor { a = new Nope(); }"), vec![UNKNOWN_REACTOR]);
        assert_eq!(codes("target C; main reactor M { a = new M(); }"), vec![UNKNOWN_REACTOR]);
    }

    #[test]
    fn connection_direction_table() {
        use Endpoint::*;
        let all = [OwnInput, OwnOutput, ChildInput, ChildOutput, Timer, Builtin, Other];
        let legal: Vec<(Endpoint, Endpoint)> = all
            .iter()
            .flat_map(|&a| all.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| connection_allowed(a, b))
            .collect();
        assert_eq!(
            legal,
            vec![
                (OwnInput, OwnOutput),
                (OwnInput, ChildInput),
                (ChildOutput, OwnOutput),
                (ChildOutput, ChildInput),
            ]
        );
        assert!(!legal.contains(&(ChildInput, ChildInput)));
    }

    #[test]
    fn sibling_inputs_cannot_be_connected() {
        let src = "target C; reactor A { input in: int; } reactor B { input in: int; }\n\
                   main reactor { a = new A(); b = new B(); a.in -> b.in; }";
        assert_eq!(codes(src), vec![BAD_CONNECTION]);
        let ok = "target C; reactor A { output out: int; } reactor B { input in: int; }\n\
                  main reactor { a = new A(); b = new B(); a.out -> b.in; }";
        assert!(codes(ok).is_empty());
    }

    #[test]
    fn unresolved_connection_endpoints() {
        assert_eq!(
            codes("target C; main reactor { x.y -> z; }"),
            vec![BAD_CONNECTION, BAD_CONNECTION]
        );
    }

    #[test]
    fn reaction_references() {
        assert!(codes("target C; main reactor { timer t; output o; reaction(t, startup) -> o {==} }")
            .is_empty());
        assert_eq!(codes("target C; main reactor { reaction(t) {==} }"), vec![BAD_REFERENCE]);
        assert_eq!(
            codes("target C; main reactor { timer t; reaction(t) -> t {==} }"),
            vec![BAD_REFERENCE]
        );
    }

    #[test]
    fn duplicate_names() {
        assert_eq!(codes("target C; main reactor { input x; output x; }"), vec![DUPLICATE_NAME]);
        assert_eq!(codes("target C; reactor A {} reactor A {} main reactor {}"), vec![DUPLICATE_NAME]);
    }

    #[test]
    fn timer_time_rule() {
        assert!(codes("target C; main reactor { timer t(0, 10 ms); }").is_empty());
        assert_eq!(codes("target C; main reactor { timer t(100, 1000); }"), vec![BAD_TIME, BAD_TIME]);
        assert!(codes("target C; main reactor(p: time = 1 s) { timer t(0, p); }").is_empty());
    }

    #[test]
    fn diagnostics_are_sorted_and_in_bounds() {
        let src = "main reactor {\n  timer t(5);\n  reaction(q) {==}\n}\n";
        let m = parse_model(src).unwrap();
        let d = validate(&m);
        assert_eq!(d.iter().map(|d| d.code.as_str()).collect::<Vec<_>>(), vec![
            MISSING_TARGET,
            BAD_TIME,
            BAD_REFERENCE
        ]);
        let idx = LineIndex::new(src);
        assert!(d.iter().all(|d| idx.contains(d.range)));
        assert_eq!(validate(&m), d);
    }
}
