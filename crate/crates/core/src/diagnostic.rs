use serde::{Deserialize, Serialize};

/// Byte range into a source text.
///
/// Spans are location metadata and never take part in structural equality:
/// two spans always compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl PartialEq for Span {
    fn eq(&self, _other: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

/// 0-based line and column, length in characters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Range {
    pub line: usize,
    pub col: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub range: Range,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, range: Range) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            range,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        };
        write!(
            f,
            "{}:{}: {}[{}]: {}",
            self.range.line + 1,
            self.range.col + 1,
            sev,
            self.code,
            self.message
        )
    }
}

/// Converts byte spans into line/column ranges for one source text.
pub struct LineIndex<'a> {
    text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut line_starts = vec![0];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        LineIndex { text, line_starts }
    }

    fn clamp(&self, mut offset: usize) -> usize {
        offset = offset.min(self.text.len());
        while !self.text.is_char_boundary(offset) {
            offset -= 1;
        }
        offset
    }

    pub fn range(&self, span: Span) -> Range {
        let start = self.clamp(span.start);
        let end = self.clamp(span.end.max(start));
        let line = match self.line_starts.binary_search(&start) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        let col = self.text[self.line_starts[line]..start].chars().count();
        let length = self.text[start..end].chars().count();
        Range { line, col, length }
    }

    /// True if `range` addresses characters that exist in the text.
    pub fn contains(&self, range: Range) -> bool {
        let Some(&line_start) = self.line_starts.get(range.line) else {
            return false;
        };
        let rest = &self.text[line_start..];
        let mut chars = rest.chars();
        for _ in 0..range.col {
            match chars.next() {
                Some('\n') | None => return false,
                Some(_) => {}
            }
        }
        chars.as_str().chars().count() >= range.length
    }
}
