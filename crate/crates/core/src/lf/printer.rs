use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

/// Canonical text: one element per line, 4-space indent, `;` after every
/// declaration, a blank line between reactors, trailing newline.
pub fn pretty_print(model: &Model) -> String {
    let mut out = String::new();
    if let Some(t) = &model.target {
        let _ = writeln!(out, "target {};", t.name);
    }
    for (i, r) in model.reactors.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_reactor(&mut out, r);
    }
    out
}

pub fn print_reactor(out: &mut String, r: &ReactorDef) {
    if r.is_main {
        out.push_str("main ");
    }
    out.push_str("reactor");
    if let Some(name) = &r.name {
        out.push(' ');
        out.push_str(name);
    }
    if !r.params.is_empty() {
        out.push('(');
        for (i, p) in r.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&p.name);
            if let Some(t) = &p.type_name {
                let _ = write!(out, ": {t}");
            }
            if let Some(d) = &p.default {
                let _ = write!(out, " = {}", print_expr(d));
            }
        }
        out.push(')');
    }
    out.push_str(" {\n");
    for e in &r.elements {
        out.push_str(INDENT);
        out.push_str(&print_element(e));
        out.push('\n');
    }
    out.push_str("}\n");
}

/// Single-line canonical form of one element, without indentation.
pub fn print_element(e: &Element) -> String {
    match e {
        Element::Input(p) => format!("input {};", port_decl(p)),
        Element::Output(p) => format!("output {};", port_decl(p)),
        Element::Timer(t) => {
            let mut s = String::new();
            if let Some(l) = &t.label {
                let _ = write!(s, "@label(\"{l}\") ");
            }
            let _ = write!(s, "timer {}", t.name);
            match (&t.offset, &t.period) {
                (Some(o), Some(p)) => {
                    let _ = write!(s, "({}, {})", print_expr(o), print_expr(p));
                }
                (Some(o), None) => {
                    let _ = write!(s, "({})", print_expr(o));
                }
                // a period without an offset cannot be written; the offset defaults to 0
                (None, Some(p)) => {
                    let _ = write!(s, "(0, {})", print_expr(p));
                }
                (None, None) => {}
            }
            s.push(';');
            s
        }
        Element::State(v) => {
            let mut s = format!("state {}", v.name);
            if let Some(t) = &v.type_name {
                let _ = write!(s, ": {t}");
            }
            if let Some(i) = &v.init {
                let _ = write!(s, " = {}", print_expr(i));
            }
            s.push(';');
            s
        }
        Element::Reaction(r) => {
            let mut s = format!("reaction({})", join_refs(&r.triggers));
            if !r.effects.is_empty() {
                let _ = write!(s, " -> {}", join_refs(&r.effects));
            }
            let _ = write!(s, " {{={}=}}", r.body.text);
            s
        }
        Element::Instantiation(i) => {
            let args: Vec<String> =
                i.args.iter().map(|a| format!("{} = {}", a.name, print_expr(&a.value))).collect();
            format!("{} = new {}({});", i.name, i.reactor, args.join(", "))
        }
        Element::Connection(c) => format!("{} -> {};", c.from, c.to),
    }
}

fn port_decl(p: &Port) -> String {
    match &p.type_name {
        Some(t) => format!("{}: {}", p.name, t),
        None => p.name.clone(),
    }
}

fn join_refs(refs: &[Ref]) -> String {
    refs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Int(v) => v.to_string(),
        Expr::Time { value, unit } => format!("{value} {}", unit.as_str()),
        Expr::Float(s) | Expr::Ident(s) => s.clone(),
        Expr::Str(s) => format!("\"{s}\""),
        Expr::Code(c) => format!("{{={}=}}", c.text),
    }
}
