//! Live Prometheus transport over blocking HTTP.

use std::time::Duration;

use catalogql::prom::{HttpReply, PromClient, PromError, Transport};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug)]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    base: String,
    token: Option<String>,
    timeout: Duration,
}

pub type LiveClient = PromClient<HttpTransport>;

impl HttpTransport {
    /// `base` is the server root, e.g. `http://prometheus:9090`. A trailing
    /// slash is ignored.
    pub fn new(base: &str, timeout: Duration, token: Option<String>) -> Result<Self, PromError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| PromError::Transport(e.to_string()))?;
        Ok(HttpTransport {
            client,
            base: base.trim_end_matches('/').to_string(),
            token: token.filter(|t| !t.is_empty()),
            timeout,
        })
    }

    pub fn base(&self) -> &str {
        &self.base
    }
}

impl Transport for HttpTransport {
    fn get(&self, path: &str, params: &[(String, String)]) -> Result<HttpReply, PromError> {
        let mut req = self.client.get(format!("{}{}", self.base, path)).query(params);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| self.map_err(e))?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| self.map_err(e))?;
        Ok(HttpReply { status, body })
    }
}

impl HttpTransport {
    fn map_err(&self, e: reqwest::Error) -> PromError {
        if e.is_timeout() {
            PromError::Timeout(self.timeout.as_millis() as u64)
        } else {
            PromError::Transport(e.to_string())
        }
    }
}

pub fn live_client(base: &str, timeout: Duration, token: Option<String>) -> Result<LiveClient, PromError> {
    Ok(PromClient::new(HttpTransport::new(base, timeout, token)?))
}
