//! Parser for an Xtext-like grammar notation with attached `//` doc comments.
//!
//! Supported: `Name: body ;` rules, quoted keywords, `=` and `+=`
//! assignments, `(...)` groups, `?` and `*` multiplicities, `|` alternatives.
//! Cross-references, actions, terminal rules and other Xtext constructs are
//! rejected with a diagnostic.

use serde::{Deserialize, Serialize};

use crate::diagnostic::{Diagnostic, LineIndex, Span};

pub const GRAMMAR_SYNTAX: &str = "FG001";
pub const DUPLICATE_RULE: &str = "FG002";
pub const UNSUPPORTED: &str = "FG003";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarModel {
    pub rules: Vec<Rule>,
}

impl GrammarModel {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    /// Comment lines directly above the rule, without `//`, trimmed.
    pub doc: Vec<String>,
    /// Top-level sequence. Top-level alternatives form a single `Alternative`.
    pub body: Vec<BodyNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplicity {
    One,
    Optional,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignOp {
    /// `=`
    Single,
    /// `+=`
    Array,
}

impl AssignOp {
    pub fn as_str(self) -> &'static str {
        match self {
            AssignOp::Single => "=",
            AssignOp::Array => "+=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BodyNode {
    Keyword(String),
    Feature { name: String, op: AssignOp, type_name: String },
    Group { children: Vec<BodyNode>, multiplicity: Multiplicity },
    Alternative(Vec<Vec<BodyNode>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub name: String,
    pub op: AssignOp,
    pub type_name: String,
    pub required: bool,
}

/// Features of `rule` in source order. A feature is required only if no
/// enclosing group is optional or starred and it is not inside an alternative.
/// Repeated names merge: the first occurrence fixes the type, any optional
/// occurrence makes the merged feature optional.
pub fn features_in_order(rule: &Rule) -> Vec<FeatureInfo> {
    fn walk(nodes: &[BodyNode], optional: bool, out: &mut Vec<FeatureInfo>) {
        for n in nodes {
            match n {
                BodyNode::Keyword(_) => {}
                BodyNode::Feature { name, op, type_name } => {
                    match out.iter_mut().find(|f| &f.name == name) {
                        Some(existing) => existing.required &= !optional,
                        None => out.push(FeatureInfo {
                            name: name.clone(),
                            op: *op,
                            type_name: type_name.clone(),
                            required: !optional,
                        }),
                    }
                }
                BodyNode::Group { children, multiplicity } => {
                    walk(children, optional || *multiplicity != Multiplicity::One, out)
                }
                BodyNode::Alternative(branches) => {
                    for b in branches {
                        walk(b, true, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(&rule.body, false, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Keyword(String),
    Colon,
    Semi,
    LParen,
    RParen,
    Question,
    Star,
    Pipe,
    Assign,
    PlusAssign,
    /// Recognized but unsupported notation, with a description.
    Unsupported(String),
    Eof,
}

struct Lexed {
    tokens: Vec<(Tok, Span)>,
    /// (line number, text) of every `//` comment that is alone on its line.
    comments: Vec<(usize, String)>,
    errors: Vec<(Span, &'static str, String)>,
}

fn lex(text: &str) -> Lexed {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    let mut errors = Vec::new();
    let mut line = 0usize;
    let mut line_has_code = false;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let mut push = |tok: Tok, len: usize, line_has_code: &mut bool| {
            tokens.push((tok, Span::new(start, start + len)));
            *line_has_code = true;
            len
        };
        match c {
            b'\n' => {
                line += 1;
                line_has_code = false;
                i += 1;
            }
            _ if c.is_ascii_whitespace() => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                let end = text[i..].find('\n').map_or(bytes.len(), |e| i + e);
                if !line_has_code {
                    comments.push((line, text[i + 2..end].trim().to_string()));
                }
                i = end;
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let end = text[i + 2..].find("*/").map_or(bytes.len(), |e| i + 2 + e + 2);
                line += text[i..end].matches('\n').count();
                if end == bytes.len() && !text[i..].ends_with("*/") {
                    errors.push((Span::new(i, i + 2), GRAMMAR_SYNTAX, "unterminated block comment".into()));
                }
                i = end;
            }
            b'\'' | b'"' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != c && bytes[j] != b'\n' {
                    if bytes[j] == b'\\' {
                        j += 1;
                    }
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == c {
                    let kw = text[i + 1..j].to_string();
                    i += push(Tok::Keyword(kw), j + 1 - i, &mut line_has_code);
                } else {
                    errors.push((Span::new(i, j.min(bytes.len())), GRAMMAR_SYNTAX, "unbalanced quote".into()));
                    i = j.min(bytes.len());
                }
            }
            b':' => i += push(Tok::Colon, 1, &mut line_has_code),
            b';' => i += push(Tok::Semi, 1, &mut line_has_code),
            b'(' => i += push(Tok::LParen, 1, &mut line_has_code),
            b')' => i += push(Tok::RParen, 1, &mut line_has_code),
            b'?' if bytes.get(i + 1) == Some(&b'=') => {
                i += push(Tok::Unsupported("boolean assignment `?=`".into()), 2, &mut line_has_code)
            }
            b'?' => i += push(Tok::Question, 1, &mut line_has_code),
            b'*' => i += push(Tok::Star, 1, &mut line_has_code),
            b'|' => i += push(Tok::Pipe, 1, &mut line_has_code),
            b'=' if bytes.get(i + 1) == Some(&b'>') => {
                i += push(Tok::Unsupported("predicate `=>`".into()), 2, &mut line_has_code)
            }
            b'=' => i += push(Tok::Assign, 1, &mut line_has_code),
            b'+' if bytes.get(i + 1) == Some(&b'=') => i += push(Tok::PlusAssign, 2, &mut line_has_code),
            b'+' => i += push(Tok::Unsupported("multiplicity `+`".into()), 1, &mut line_has_code),
            b'[' => i += push(Tok::Unsupported("cross-reference `[...]`".into()), 1, &mut line_has_code),
            b'{' | b'}' => i += push(Tok::Unsupported("action `{...}`".into()), 1, &mut line_has_code),
            b']' => i += push(Tok::Unsupported("cross-reference `[...]`".into()), 1, &mut line_has_code),
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += push(Tok::Unsupported("predicate `->`".into()), 2, &mut line_has_code)
            }
            b'!' => i += push(Tok::Unsupported("negation `!`".into()), 1, &mut line_has_code),
            _ if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &text[i..j];
                let tok = match word {
                    "terminal" | "hidden" | "returns" | "fragment" | "enum" | "grammar" | "import"
                    | "generate" | "with" => Tok::Unsupported(format!("`{word}`")),
                    _ => Tok::Ident(word.to_string()),
                };
                i += push(tok, j - i, &mut line_has_code);
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                errors.push((Span::new(i, i + ch.len_utf8()), GRAMMAR_SYNTAX, format!("unexpected character `{ch}`")));
                i += ch.len_utf8();
            }
        }
    }
    tokens.push((Tok::Eof, Span::new(text.len(), text.len())));
    Lexed { tokens, comments, errors }
}

pub fn parse_grammar(text: &str) -> Result<GrammarModel, Vec<Diagnostic>> {
    let lexed = lex(text);
    let index = LineIndex::new(text);
    let mut p = GParser { tokens: lexed.tokens, pos: 0, errors: lexed.errors };
    let mut rules: Vec<(Rule, Span)> = Vec::new();

    while p.peek() != &Tok::Eof {
        let start = p.pos;
        match p.rule() {
            Some((mut rule, span)) => {
                let rule_line = index.range(span).line;
                rule.doc = doc_block(&lexed.comments, rule_line);
                if rules.iter().any(|(r, _)| r.name == rule.name) {
                    p.errors.push((span, DUPLICATE_RULE, format!("duplicate rule `{}`", rule.name)));
                } else {
                    rules.push((rule, span));
                }
            }
            None => p.recover(start),
        }
    }

    if p.errors.is_empty() {
        Ok(GrammarModel { rules: rules.into_iter().map(|(r, _)| r).collect() })
    } else {
        let mut errors = p.errors;
        errors.sort_by_key(|(s, _, _)| s.start);
        Err(errors
            .into_iter()
            .map(|(span, code, msg)| Diagnostic::error(code, msg, index.range(span)))
            .collect())
    }
}

/// The contiguous run of comment lines ending on the line right above `rule_line`.
fn doc_block(comments: &[(usize, String)], rule_line: usize) -> Vec<String> {
    let mut doc = Vec::new();
    let mut expected = rule_line;
    for (line, text) in comments.iter().rev() {
        if *line >= rule_line {
            continue;
        }
        if expected == 0 || *line != expected - 1 {
            break;
        }
        doc.push(text.clone());
        expected = *line;
    }
    doc.reverse();
    doc
}

struct GParser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
    errors: Vec<(Span, &'static str, String)>,
}

impl GParser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&mut self, what: &str) -> Option<T> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Unsupported(desc) => {
                self.errors.push((span, UNSUPPORTED, format!("unsupported grammar notation: {desc}")))
            }
            Tok::Eof => self.errors.push((span, GRAMMAR_SYNTAX, format!("expected {what}, found end of input"))),
            other => self.errors.push((span, GRAMMAR_SYNTAX, format!("expected {what}, found {other:?}"))),
        }
        None
    }

    /// Skips past the next `;` that follows the failure point.
    fn recover(&mut self, start: usize) {
        if self.pos == start {
            self.bump();
        }
        while !matches!(self.peek(), Tok::Eof) {
            if self.bump().0 == Tok::Semi {
                return;
            }
        }
    }

    fn rule(&mut self) -> Option<(Rule, Span)> {
        let (name, span) = match self.peek().clone() {
            Tok::Ident(n) => (n, self.bump().1),
            _ => return self.fail("rule name"),
        };
        if self.peek() != &Tok::Colon {
            return self.fail("`:` after rule name");
        }
        self.bump();
        let body = self.alternatives()?;
        if self.peek() == &Tok::RParen {
            let s = self.span();
            self.errors.push((s, GRAMMAR_SYNTAX, "unbalanced `)`".into()));
            return None;
        }
        if self.peek() != &Tok::Semi {
            return self.fail("`;` terminating the rule");
        }
        self.bump();
        Some((Rule { name, doc: Vec::new(), body }, span))
    }

    fn alternatives(&mut self) -> Option<Vec<BodyNode>> {
        let mut branches = vec![self.sequence()?];
        while self.peek() == &Tok::Pipe {
            self.bump();
            branches.push(self.sequence()?);
        }
        if branches.len() == 1 {
            branches.pop()
        } else {
            Some(vec![BodyNode::Alternative(branches)])
        }
    }

    fn sequence(&mut self) -> Option<Vec<BodyNode>> {
        let mut items = Vec::new();
        while matches!(self.peek(), Tok::Keyword(_) | Tok::Ident(_) | Tok::LParen | Tok::Unsupported(_)) {
            items.push(self.element()?);
        }
        if items.is_empty() {
            return self.fail("a keyword, assignment or group");
        }
        Some(items)
    }

    fn element(&mut self) -> Option<BodyNode> {
        let atom = match self.peek().clone() {
            Tok::Keyword(k) => {
                self.bump();
                BodyNode::Keyword(k)
            }
            Tok::Ident(name) => {
                self.bump();
                let op = match self.peek() {
                    Tok::Assign => AssignOp::Single,
                    Tok::PlusAssign => AssignOp::Array,
                    _ => {
                        let s = self.span();
                        self.errors.push((
                            s,
                            UNSUPPORTED,
                            format!("unsupported grammar notation: unassigned rule call `{name}`"),
                        ));
                        return None;
                    }
                };
                self.bump();
                let type_name = match self.peek().clone() {
                    Tok::Ident(t) => {
                        self.bump();
                        t
                    }
                    _ => return self.fail("a type name after the assignment"),
                };
                BodyNode::Feature { name, op, type_name }
            }
            Tok::LParen => {
                let open = self.bump().1;
                let children = self.alternatives()?;
                if self.peek() != &Tok::RParen {
                    self.errors.push((open, GRAMMAR_SYNTAX, "unbalanced `(`".into()));
                    return None;
                }
                self.bump();
                BodyNode::Group { children, multiplicity: Multiplicity::One }
            }
            _ => return self.fail("a keyword, assignment or group"),
        };
        let multiplicity = match self.peek() {
            Tok::Question => Multiplicity::Optional,
            Tok::Star => Multiplicity::Star,
            _ => return Some(atom),
        };
        self.bump();
        Some(match atom {
            BodyNode::Group { children, multiplicity: Multiplicity::One } => {
                BodyNode::Group { children, multiplicity }
            }
            other => BodyNode::Group { children: vec![other], multiplicity },
        })
    }
}
