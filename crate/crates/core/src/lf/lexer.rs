use crate::diagnostic::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Integer literal text, possibly with a leading `-`.
    Int(String),
    Float(String),
    Str(String),
    Code(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Colon,
    Eq,
    Arrow,
    At,
    Star,
    Error(String),
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Int(s) | TokenKind::Float(s) => format!("number `{s}`"),
            TokenKind::Str(_) => "string literal".into(),
            TokenKind::Code(_) => "code block".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Dot => "`.`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::At => "`@`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Error(s) => s.clone(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = |kind| Some((kind, 1));
        let simple = match c {
            b'{' if bytes.get(i + 1) == Some(&b'=') => None,
            b'{' => single(TokenKind::LBrace),
            b'}' => single(TokenKind::RBrace),
            b'(' => single(TokenKind::LParen),
            b')' => single(TokenKind::RParen),
            b';' => single(TokenKind::Semi),
            b',' => single(TokenKind::Comma),
            b'.' => single(TokenKind::Dot),
            b':' => single(TokenKind::Colon),
            b'=' => single(TokenKind::Eq),
            b'@' => single(TokenKind::At),
            b'*' => single(TokenKind::Star),
            b'-' if bytes.get(i + 1) == Some(&b'>') => Some((TokenKind::Arrow, 2)),
            _ => None,
        };
        if let Some((kind, len)) = simple {
            tokens.push(Token { kind, span: Span::new(i, i + len) });
            i += len;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            match text[i + 2..].find("*/") {
                Some(end) => i = i + 2 + end + 2,
                None => {
                    tokens.push(Token {
                        kind: TokenKind::Error("unterminated block comment".into()),
                        span: Span::new(start, start + 2),
                    });
                    i = bytes.len();
                }
            }
        } else if c == b'{' {
            match text[i + 2..].find("=}") {
                Some(end) => {
                    let body = &text[i + 2..i + 2 + end];
                    i = i + 2 + end + 2;
                    tokens.push(Token {
                        kind: TokenKind::Code(body.to_string()),
                        span: Span::new(start, i),
                    });
                }
                None => {
                    tokens.push(Token {
                        kind: TokenKind::Error("unterminated code block, expected `=}`".into()),
                        span: Span::new(start, start + 2),
                    });
                    i = bytes.len();
                }
            }
        } else if c == b'"' {
            i += 1;
            let mut closed = false;
            while i < bytes.len() {
                match bytes[i] {
                    b'\\' => i += 2,
                    b'"' => {
                        closed = true;
                        i += 1;
                        break;
                    }
                    b'\n' => break,
                    _ => i += 1,
                }
            }
            i = i.min(bytes.len());
            if closed {
                tokens.push(Token {
                    kind: TokenKind::Str(text[start + 1..i - 1].to_string()),
                    span: Span::new(start, i),
                });
            } else {
                tokens.push(Token {
                    kind: TokenKind::Error("unterminated string literal".into()),
                    span: Span::new(start, i),
                });
            }
        } else if c.is_ascii_digit()
            || (c == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let is_float = bytes.get(i) == Some(&b'.')
                && bytes.get(i + 1).is_some_and(u8::is_ascii_digit);
            if is_float {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit = text[start..i].to_string();
            let kind = if is_float { TokenKind::Float(lit) } else { TokenKind::Int(lit) };
            tokens.push(Token { kind, span: Span::new(start, i) });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(text[start..i].to_string()),
                span: Span::new(start, i),
            });
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            i += ch.len_utf8();
            tokens.push(Token {
                kind: TokenKind::Error(format!("unexpected character `{ch}`")),
                span: Span::new(start, i),
            });
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, span: Span::new(text.len(), text.len()) });
    tokens
}
