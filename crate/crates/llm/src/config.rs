use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Secret credential. Never printed, serialized or echoed in errors.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        ApiKey(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

/// Exponential backoff with symmetric jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backoff {
    pub base: Duration,
    pub factor: f64,
    /// Fraction of the delay, e.g. 0.2 for ±20 %.
    pub jitter: f64,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff { base: Duration::from_millis(500), factor: 2.0, jitter: 0.2 }
    }
}

impl Backoff {
    /// Delay before retry `attempt` (0-based), with jitter drawn from `unit`
    /// in `[0, 1)`.
    pub fn delay(&self, attempt: u32, unit: f64) -> Duration {
        let nominal = self.base.as_secs_f64() * self.factor.powi(attempt as i32);
        let scale = 1.0 + self.jitter * (2.0 * unit - 1.0);
        Duration::from_secs_f64((nominal * scale).max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatewayConfig {
    pub base_url: String,
    pub api_key: ApiKey,
    pub chat_model: String,
    pub transcription_model: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff: Backoff,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            base_url: "https://api.openai.com/v1".into(),
            api_key: ApiKey::default(),
            chat_model: "o4-mini".into(),
            transcription_model: "whisper-1".into(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            backoff: Backoff::default(),
        }
    }
}

impl GatewayConfig {
    /// Defaults overridden by `FORGE_API_KEY`, `FORGE_BASE_URL`,
    /// `FORGE_CHAT_MODEL` and `FORGE_TRANSCRIBE_MODEL`.
    pub fn from_env() -> Self {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Self {
        let mut cfg = GatewayConfig::default();
        if let Some(k) = get("FORGE_API_KEY") {
            cfg.api_key = ApiKey::new(k);
        }
        if let Some(u) = get("FORGE_BASE_URL") {
            cfg.base_url = u;
        }
        if let Some(m) = get("FORGE_CHAT_MODEL") {
            cfg.chat_model = m;
        }
        if let Some(m) = get("FORGE_TRANSCRIBE_MODEL") {
            cfg.transcription_model = m;
        }
        cfg
    }

    pub fn check(&self) -> Result<(), String> {
        if self.timeout.is_zero() {
            return Err("timeout must be positive".into());
        }
        if self.base_url.is_empty() {
            return Err("base_url must not be empty".into());
        }
        Ok(())
    }

    pub(crate) fn endpoint(&self, path: &str) -> String {
        format!("{}/{path}", self.base_url.trim_end_matches('/'))
    }
}
