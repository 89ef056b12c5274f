//! The Lingua Franca subset: lexer, parser, validator and canonical printer.

mod ast;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use parser::{
    parse_attribute, parse_element, parse_expr, parse_model, parse_snippet, SYNTAX_ERROR,
};
pub use printer::{pretty_print, print_element, print_expr};
pub use validate::{
    connection_allowed, resolve, validate, Endpoint, BAD_CONNECTION, BAD_REFERENCE, BAD_TIME,
    DUPLICATE_NAME, MAIN_REACTOR, MISSING_TARGET, UNKNOWN_REACTOR,
};

use crate::diagnostic::{Diagnostic, Range};

/// Appends the element parsed from `snippet` to the named reactor and returns
/// the resulting model, re-parsed from its canonical text. `model` is untouched.
pub fn insert_element(model: &Model, reactor: &str, snippet: &str) -> Result<Model, Vec<Diagnostic>> {
    let element = parse_element(snippet)?;
    let Some(pos) = model
        .reactors
        .iter()
        .position(|r| r.name.as_deref() == Some(reactor) || (reactor == "main" && r.is_main && r.name.is_none()))
    else {
        return Err(vec![Diagnostic::error(
            UNKNOWN_REACTOR,
            format!("unknown reactor `{reactor}`"),
            Range::default(),
        )]);
    };
    let mut updated = model.clone();
    updated.reactors[pos].elements.push(element);
    let text = pretty_print(&updated);
    let reparsed = parse_model(&text)?;
    let dups: Vec<Diagnostic> =
        validate(&reparsed).into_iter().filter(|d| d.code == DUPLICATE_NAME).collect();
    if dups.is_empty() {
        Ok(reparsed)
    } else {
        Err(dups)
    }
}
