use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use crate::diagnostic::{Diagnostic, LineIndex, Span};

/// Code attached to every syntax error.
pub const SYNTAX_ERROR: &str = "LF000";

const ELEMENT_KEYWORDS: &[&str] = &["input", "output", "timer", "state", "reaction"];

pub fn parse_model(text: &str) -> Result<Model, Vec<Diagnostic>> {
    let mut p = Parser::new(text);
    let (target, reactors) = p.model();
    p.finish(Model { target, reactors, source_text: text.to_string() })
}

/// Parses text that must contain exactly one element (port, timer, reaction, ...).
pub fn parse_element(text: &str) -> Result<Element, Vec<Diagnostic>> {
    match parse_snippet(text)? {
        Snippet::Element(e) => Ok(e),
        other => {
            let what = match other {
                Snippet::Target(_) => "a target declaration",
                _ => "a reactor definition",
            };
            let span = Span::new(0, text.len());
            Err(vec![syntax_error(text, span, format!("expected a single element, found {what}"))])
        }
    }
}

/// Parses text that must contain exactly one target declaration, reactor, or element.
pub fn parse_snippet(text: &str) -> Result<Snippet, Vec<Diagnostic>> {
    let mut p = Parser::new(text);
    let snippet = match p.peek_ident() {
        Some("target") => p.target().map(Snippet::Target),
        Some("main" | "reactor") => p.reactor().map(Snippet::Reactor),
        _ => p.element().map(Snippet::Element),
    };
    if snippet.is_some() {
        p.expect_end();
    }
    match snippet {
        Some(s) => p.finish(s),
        None => p.finish_err(),
    }
}

/// Parses a complete expression such as `100 ms`, `0`, `"text"` or `{= code =}`.
pub fn parse_expr(text: &str) -> Result<Expr, Vec<Diagnostic>> {
    let mut p = Parser::new(text);
    let expr = p.expr();
    p.expect_end();
    match expr {
        Some(e) => p.finish(e),
        None => p.finish_err(),
    }
}

/// Parses one `@name` or `@name(...)` attribute; returns the label text for `@label`.
pub fn parse_attribute(text: &str) -> Result<Option<String>, Vec<Diagnostic>> {
    let mut p = Parser::new(text);
    let attr = p.attribute();
    p.expect_end();
    match attr {
        Some(a) => p.finish(a),
        None => p.finish_err(),
    }
}

fn syntax_error(text: &str, span: Span, message: String) -> Diagnostic {
    Diagnostic::error(SYNTAX_ERROR, message, LineIndex::new(text).range(span))
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<(Span, String)>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut tokens = tokenize(text);
        let mut errors = Vec::new();
        tokens.retain(|t| match &t.kind {
            TokenKind::Error(msg) => {
                errors.push((t.span, msg.clone()));
                false
            }
            _ => true,
        });
        Parser { text, tokens, pos: 0, errors }
    }

    fn finish<T>(self, value: T) -> Result<T, Vec<Diagnostic>> {
        if self.errors.is_empty() {
            Ok(value)
        } else {
            self.finish_err()
        }
    }

    fn finish_err<T>(self) -> Result<T, Vec<Diagnostic>> {
        let index = LineIndex::new(self.text);
        let mut errors = self.errors;
        errors.sort_by_key(|(span, _)| span.start);
        let mut diags: Vec<Diagnostic> = errors
            .into_iter()
            .map(|(span, msg)| Diagnostic::error(SYNTAX_ERROR, msg, index.range(span)))
            .collect();
        diags.dedup();
        if diags.is_empty() {
            let span = Span::new(self.text.len(), self.text.len());
            diags.push(Diagnostic::error(SYNTAX_ERROR, "invalid input", index.range(span)));
        }
        Err(diags)
    }

    fn expect_end(&mut self) {
        if !self.at_eof() {
            let span = self.peek().span;
            let found = self.peek().kind.describe();
            self.error(span, format!("expected end of snippet, found {found}"));
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn peek_ident(&self) -> Option<&str> {
        match &self.peek().kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if &self.peek().kind == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&mut self, span: Span, message: String) {
        self.errors.push((span, message));
    }

    fn unexpected(&mut self, expected: &str) {
        let t = self.peek().clone();
        self.error(t.span, format!("expected {expected}, found {}", t.kind.describe()));
    }

    fn expect(&mut self, kind: TokenKind) -> Option<Span> {
        if self.peek().kind == kind {
            Some(self.bump().span)
        } else {
            self.unexpected(&kind.describe());
            None
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Option<Span> {
        if self.peek_ident() == Some(kw) {
            Some(self.bump().span)
        } else {
            self.unexpected(&format!("`{kw}`"));
            None
        }
    }

    fn name(&mut self, what: &str) -> Option<(String, Span)> {
        if let TokenKind::Ident(s) = &self.peek().kind {
            if is_identifier(s) {
                let s = s.clone();
                return Some((s, self.bump().span));
            }
        }
        self.unexpected(what);
        None
    }

    fn model(&mut self) -> (Option<Target>, Vec<ReactorDef>) {
        let mut target: Option<Target> = None;
        let mut reactors = Vec::new();
        while !self.at_eof() {
            match self.peek_ident() {
                Some("target") => {
                    let start = self.pos;
                    if let Some(t) = self.target() {
                        if target.is_some() {
                            self.error(t.span, "duplicate target declaration".into());
                        } else {
                            target = Some(t);
                        }
                    } else {
                        self.recover_top(start);
                    }
                }
                Some("main" | "reactor") => {
                    let start = self.pos;
                    match self.reactor() {
                        Some(r) => reactors.push(r),
                        None => self.recover_top(start),
                    }
                }
                _ => {
                    self.unexpected("`target` or `reactor`");
                    let start = self.pos;
                    self.recover_top(start);
                }
            }
        }
        (target, reactors)
    }

    /// Skips to the next top-level declaration.
    fn recover_top(&mut self, start: usize) {
        if self.pos == start {
            self.bump();
        }
        let mut depth = 0usize;
        while !self.at_eof() {
            match &self.peek().kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => depth = depth.saturating_sub(1),
                TokenKind::Ident(s)
                    if depth == 0 && matches!(s.as_str(), "target" | "main" | "reactor") =>
                {
                    return;
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn target(&mut self) -> Option<Target> {
        let kw = self.expect_keyword("target")?;
        let (name, span) = self.name("target language name")?;
        self.eat(&TokenKind::Semi);
        Some(Target { name, span: kw.to(span) })
    }

    fn reactor(&mut self) -> Option<ReactorDef> {
        let start = self.peek().span;
        let is_main = self.eat_keyword("main");
        self.expect_keyword("reactor")?;
        let mut name = None;
        let mut span = start;
        if let TokenKind::Ident(_) = self.peek().kind {
            let (n, s) = self.name("reactor name")?;
            name = Some(n);
            span = s;
        } else if !is_main {
            self.unexpected("reactor name");
            return None;
        }
        let mut params = Vec::new();
        if self.eat(&TokenKind::LParen) && !self.eat(&TokenKind::RParen) {
            loop {
                params.push(self.param()?);
                if self.eat(&TokenKind::Comma) {
                    continue;
                }
                self.expect(TokenKind::RParen)?;
                break;
            }
        }
        self.expect(TokenKind::LBrace)?;
        let mut elements = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Eof => {
                    self.unexpected("`}` closing the reactor");
                    break;
                }
                _ => {}
            }
            let start = self.pos;
            match self.element() {
                Some(e) => elements.push(e),
                None => self.recover_element(start),
            }
        }
        self.eat(&TokenKind::Semi);
        Some(ReactorDef { name, is_main, params, elements, span })
    }

    /// Skips the rest of a malformed element: through the next `;` at depth 0,
    /// or up to a token that starts another element or closes the reactor.
    fn recover_element(&mut self, start: usize) {
        let mut depth = 0usize;
        let mut first = self.pos == start;
        while !self.at_eof() {
            match &self.peek().kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace if depth == 0 => return,
                TokenKind::RBrace => depth -= 1,
                TokenKind::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                TokenKind::Ident(s)
                    if depth == 0
                        && !first
                        && (ELEMENT_KEYWORDS.contains(&s.as_str())
                            || matches!(s.as_str(), "main" | "reactor" | "target")) =>
                {
                    return;
                }
                TokenKind::At if depth == 0 && !first => return,
                _ => {}
            }
            first = false;
            self.bump();
        }
    }

    fn param(&mut self) -> Option<Param> {
        let (name, span) = self.name("parameter name")?;
        let type_name = if self.eat(&TokenKind::Colon) { Some(self.type_name()?) } else { None };
        let default = if self.eat(&TokenKind::Eq) { Some(self.expr()?) } else { None };
        Some(Param { name, type_name, default, span })
    }

    fn type_name(&mut self) -> Option<String> {
        let mut t = match &self.peek().kind {
            TokenKind::Ident(s) => s.clone(),
            _ => {
                self.unexpected("type name");
                return None;
            }
        };
        self.bump();
        while self.eat(&TokenKind::Star) {
            t.push('*');
        }
        Some(t)
    }

    fn element(&mut self) -> Option<Element> {
        // attributes are accepted on any element; only a timer's @label is kept
        let mut label = None;
        while self.peek().kind == TokenKind::At {
            if let Some(l) = self.attribute()? {
                label = Some(l);
            }
        }
        let element = match self.peek_ident() {
            Some("input") => {
                self.bump();
                self.port().map(Element::Input)
            }
            Some("output") => {
                self.bump();
                self.port().map(Element::Output)
            }
            Some("timer") => {
                self.bump();
                self.timer(label).map(Element::Timer)
            }
            Some("state") => {
                self.bump();
                self.state().map(Element::State)
            }
            Some("reaction") => self.reaction().map(Element::Reaction),
            Some(_) => match (self.peek_at(1), self.peek_at(2)) {
                (TokenKind::Eq, _) => self.instantiation().map(Element::Instantiation),
                (TokenKind::Arrow, _) | (TokenKind::Dot, TokenKind::Ident(_)) => {
                    self.connection().map(Element::Connection)
                }
                _ => {
                    self.unexpected("an element");
                    None
                }
            },
            None => {
                self.unexpected("an element");
                None
            }
        }?;
        Some(element)
    }

    /// Parses `@name` or `@name(...)`; returns the label text for `@label`.
    fn attribute(&mut self) -> Option<Option<String>> {
        self.expect(TokenKind::At)?;
        let (name, _) = self.name("attribute name")?;
        let mut label = None;
        if self.eat(&TokenKind::LParen) {
            loop {
                match self.peek().kind.clone() {
                    TokenKind::RParen => {
                        self.bump();
                        break;
                    }
                    TokenKind::Str(s) => {
                        self.bump();
                        if name == "label" && label.is_none() {
                            label = Some(s);
                        }
                    }
                    TokenKind::Ident(_) | TokenKind::Int(_) | TokenKind::Float(_) => {
                        self.bump();
                    }
                    TokenKind::Eq | TokenKind::Comma => {
                        self.bump();
                    }
                    _ => {
                        self.unexpected("attribute argument");
                        return None;
                    }
                }
            }
        }
        Some(label)
    }

    fn port(&mut self) -> Option<Port> {
        let (name, span) = self.name("port name")?;
        let type_name = if self.eat(&TokenKind::Colon) { Some(self.type_name()?) } else { None };
        self.eat(&TokenKind::Semi);
        Some(Port { name, type_name, span })
    }

    fn timer(&mut self, label: Option<String>) -> Option<Timer> {
        let (name, span) = self.name("timer name")?;
        let mut offset = None;
        let mut period = None;
        if self.eat(&TokenKind::LParen) {
            offset = Some(self.expr()?);
            if self.eat(&TokenKind::Comma) {
                period = Some(self.expr()?);
            }
            self.expect(TokenKind::RParen)?;
        }
        self.eat(&TokenKind::Semi);
        Some(Timer { name, label, offset, period, span })
    }

    fn state(&mut self) -> Option<StateVar> {
        let (name, span) = self.name("state variable name")?;
        let type_name = if self.eat(&TokenKind::Colon) { Some(self.type_name()?) } else { None };
        let init = if self.eat(&TokenKind::Eq) {
            Some(self.expr()?)
        } else if self.eat(&TokenKind::LParen) {
            let e = self.expr()?;
            self.expect(TokenKind::RParen)?;
            Some(e)
        } else {
            None
        };
        self.eat(&TokenKind::Semi);
        Some(StateVar { name, type_name, init, span })
    }

    fn reaction(&mut self) -> Option<Reaction> {
        let span = self.expect_keyword("reaction")?;
        self.expect(TokenKind::LParen)?;
        let mut triggers = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            triggers = self.ref_list()?;
            self.expect(TokenKind::RParen)?;
        }
        let effects = if self.eat(&TokenKind::Arrow) { self.ref_list()? } else { Vec::new() };
        let body = match self.peek().kind.clone() {
            TokenKind::Code(text) => {
                self.bump();
                HostCode { text }
            }
            _ => {
                self.unexpected("reaction body `{= ... =}`");
                return None;
            }
        };
        self.eat(&TokenKind::Semi);
        Some(Reaction { triggers, effects, body, span })
    }

    fn ref_list(&mut self) -> Option<Vec<Ref>> {
        let mut refs = vec![self.reference()?];
        while self.eat(&TokenKind::Comma) {
            refs.push(self.reference()?);
        }
        Some(refs)
    }

    fn reference(&mut self) -> Option<Ref> {
        let (first, span) = self.name("a reference")?;
        if self.eat(&TokenKind::Dot) {
            let (second, end) = self.name("a port name")?;
            Some(Ref { container: Some(first), name: second, span: span.to(end) })
        } else {
            Some(Ref { container: None, name: first, span })
        }
    }

    fn instantiation(&mut self) -> Option<Instantiation> {
        let (name, span) = self.name("instance name")?;
        self.expect(TokenKind::Eq)?;
        self.expect_keyword("new")?;
        let (reactor, _) = self.name("reactor name")?;
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            loop {
                let (arg, _) = self.name("parameter name")?;
                self.expect(TokenKind::Eq)?;
                let value = self.expr()?;
                args.push(Assignment { name: arg, value });
                if self.eat(&TokenKind::Comma) {
                    continue;
                }
                self.expect(TokenKind::RParen)?;
                break;
            }
        }
        self.eat(&TokenKind::Semi);
        Some(Instantiation { name, reactor, args, span })
    }

    fn connection(&mut self) -> Option<Connection> {
        let from = self.reference()?;
        self.expect(TokenKind::Arrow)?;
        let to = self.reference()?;
        self.eat(&TokenKind::Semi);
        Some(Connection { from, to })
    }

    fn expr(&mut self) -> Option<Expr> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Int(text) => {
                self.bump();
                if let Some(unit) = self.peek_ident().and_then(TimeUnit::parse) {
                    self.bump();
                    match text.parse::<u64>() {
                        Ok(value) => Some(Expr::Time { value, unit }),
                        Err(_) => {
                            self.error(tok.span, format!("invalid time value `{text}`"));
                            None
                        }
                    }
                } else {
                    match text.parse::<i64>() {
                        Ok(v) => Some(Expr::Int(v)),
                        Err(_) => {
                            self.error(tok.span, format!("integer literal `{text}` out of range"));
                            None
                        }
                    }
                }
            }
            TokenKind::Float(text) => {
                self.bump();
                Some(Expr::Float(text))
            }
            TokenKind::Str(s) => {
                self.bump();
                Some(Expr::Str(s))
            }
            TokenKind::Code(text) => {
                self.bump();
                Some(Expr::Code(HostCode { text }))
            }
            TokenKind::Ident(s) if is_identifier(&s) => {
                self.bump();
                Some(Expr::Ident(s))
            }
            _ => {
                self.unexpected("an expression");
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let m = parse_model("target C; main reactor {}").unwrap();
        assert_eq!(m.target.as_ref().unwrap().name, "C");
        assert_eq!(m.reactors.len(), 1);
        assert!(m.reactors[0].is_main);
        assert!(m.reactors[0].name.is_none());
        assert!(m.reactors[0].elements.is_empty());
        assert_eq!(m.source_text, "target C; main reactor {}");
    }

    #[test]
    fn timer_with_offset_and_period() {
        let e = parse_element("timer T(100 ms, 1 s)").unwrap();
        let Element::Timer(t) = e else { panic!("not a timer") };
        assert_eq!(t.name, "T");
        assert_eq!(t.offset, Some(Expr::Time { value: 100, unit: TimeUnit::Millis }));
        assert_eq!(t.period, Some(Expr::Time { value: 1, unit: TimeUnit::S }));
    }

    #[test]
    fn reaction_tokens() {
        // reaction ( T ) -> out CODE
        let e = parse_element("reaction(T) -> out {= print() =}").unwrap();
        let Element::Reaction(r) = e else { panic!("not a reaction") };
        assert_eq!(r.triggers, vec![Ref::local("T")]);
        assert_eq!(r.effects, vec![Ref::local("out")]);
        assert_eq!(r.body.text, " print() ");
    }

    #[test]
    fn labelled_timer_keeps_only_label() {
        let Element::Timer(t) = parse_element("@label(\"tick\") @other timer T;").unwrap() else {
            panic!()
        };
        assert_eq!(t.label.as_deref(), Some("tick"));
    }

    #[test]
    fn element_forms() {
        assert!(matches!(parse_element("a = new A();").unwrap(), Element::Instantiation(_)));
        assert!(matches!(parse_element("a.out -> b.in").unwrap(), Element::Connection(_)));
        assert!(matches!(parse_element("x -> y;").unwrap(), Element::Connection(_)));
        assert!(matches!(parse_element("state s: int = 0").unwrap(), Element::State(_)));
        assert!(matches!(parse_element("state s(0);").unwrap(), Element::State(_)));
        assert!(matches!(parse_element("input x: char*;").unwrap(), Element::Input(_)));
    }

    #[test]
    fn snippet_rejects_trailing_input() {
        assert!(parse_element("input x; input y;").is_err());
        assert!(parse_element("target C;").is_err());
        assert!(matches!(parse_snippet("reactor R {}").unwrap(), Snippet::Reactor(_)));
    }

    #[test]
    fn recovers_and_reports_several_errors() {
        let text = "target C;\nmain reactor {\n    input ;\n    timer T(1 s);\n    output 3;\n}\n";
        let errs = parse_model(text).unwrap_err();
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert_eq!(errs[0].range.line, 2);
        assert_eq!(errs[1].range.line, 4);
        assert!(errs.iter().all(|d| d.code == SYNTAX_ERROR));
    }

    #[test]
    fn recovery_at_top_level() {
        let errs = parse_model("bogus stuff { x } main reactor { input ; }").unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn units_outside_the_list_are_rejected() {
        assert!(parse_element("timer T(100 msec)").is_err());
        assert!(parse_element("timer T(1.5 s)").is_err());
    }

    #[test]
    fn standalone_expressions_and_attributes() {
        assert_eq!(parse_expr("100 ms").unwrap(), Expr::Time { value: 100, unit: TimeUnit::Millis });
        assert_eq!(parse_expr("-4").unwrap(), Expr::Int(-4));
        assert!(parse_expr("1 s 2").is_err());
        assert!(parse_expr("").is_err());
        assert_eq!(parse_attribute("@label(\"a b\")").unwrap().as_deref(), Some("a b"));
        assert_eq!(parse_attribute("@icon(\"x.png\")").unwrap(), None);
        assert!(parse_attribute("label").is_err());
        assert!(parse_attribute("@label(\"x\") timer").is_err());
    }

    #[test]
    fn unterminated_body_is_reported() {
        let errs = parse_model("main reactor { reaction() {= oops }").unwrap_err();
        assert!(errs.iter().any(|d| d.message.contains("`=}`")));
    }
}
