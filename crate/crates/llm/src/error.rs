use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Precondition,
    UnsupportedMedia,
    Transport,
    Auth,
    Http,
    Malformed,
    Timeout,
    ScriptExhausted,
    ScriptMismatch,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    Precondition(String),
    #[error("unsupported media type `{0}`; expected audio/wav, audio/webm or audio/ogg")]
    UnsupportedMedia(String),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("script exhausted after {calls} call(s)")]
    ScriptExhausted { calls: usize },
    #[error("script mismatch at call {call}:\n{diff}")]
    ScriptMismatch { call: usize, diff: String },
}

impl GatewayError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            GatewayError::Precondition(_) => ErrorKind::Precondition,
            GatewayError::UnsupportedMedia(_) => ErrorKind::UnsupportedMedia,
            GatewayError::Transport { .. } => ErrorKind::Transport,
            GatewayError::Auth { .. } => ErrorKind::Auth,
            GatewayError::Http { .. } => ErrorKind::Http,
            GatewayError::Malformed(_) => ErrorKind::Malformed,
            GatewayError::Timeout { .. } => ErrorKind::Timeout,
            GatewayError::ScriptExhausted { .. } => ErrorKind::ScriptExhausted,
            GatewayError::ScriptMismatch { .. } => ErrorKind::ScriptMismatch,
        }
    }

    /// Worth re-sending unchanged: network trouble, timeouts and 5xx.
    /// Client errors (4xx) never are.
    pub fn is_retryable(&self) -> bool {
        match self {
            GatewayError::Transport { .. } | GatewayError::Timeout { .. } => true,
            GatewayError::Http { status, .. } => *status >= 500,
            _ => false,
        }
    }
}
