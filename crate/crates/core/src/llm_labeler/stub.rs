//! Deterministic stand-in for the labeling service, usable in-process or
//! over HTTP.

use std::collections::HashMap;
use std::io::BufRead;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::response::format_labels_json;
use super::service::{wrap_completion, LabelService, LabelerRequest, ServiceError};
use crate::catalog::UncertainPolicy;
use crate::rule_labeler::RuleLabeler;

/// One scripted behaviour, selected when the report contains `contains`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubRule {
    pub contains: String,
    /// Fixed reply text. Without it the rule labeler's answer is used.
    #[serde(default)]
    pub response: Option<String>,
    /// Fail this many times per report before answering.
    #[serde(default)]
    pub fail_times: u32,
    /// HTTP status returned by scripted failures.
    #[serde(default = "default_status")]
    pub status: u16,
    /// Fail every call regardless of `fail_times`.
    #[serde(default)]
    pub always_fail: bool,
}

fn default_status() -> u16 {
    503
}

#[derive(Debug, thiserror::Error)]
pub enum StubError {
    #[error("line {line}: {message}")]
    Script { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("could not bind stub server: {0}")]
    Bind(String),
}

/// Answers with the rule labeler unless a rule says otherwise. Attempts
/// are counted per report text, so fault scripts are deterministic under
/// any concurrency.
pub struct ScriptedService {
    rules: Vec<StubRule>,
    labeler: RuleLabeler,
    attempts: Mutex<HashMap<String, u32>>,
    latency: Duration,
}

impl Default for ScriptedService {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl ScriptedService {
    pub fn new(rules: Vec<StubRule>) -> Self {
        ScriptedService {
            rules,
            labeler: RuleLabeler::default(),
            attempts: Mutex::new(HashMap::new()),
            latency: Duration::ZERO,
        }
    }

    /// Adds a fixed delay to every call.
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    /// Reads rules from JSON lines; blank lines and `#` comments skipped.
    pub fn from_jsonl<R: BufRead>(input: R) -> Result<Self, StubError> {
        let mut rules = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            rules.push(serde_json::from_str(t).map_err(|e| StubError::Script { line: i + 1, message: e.to_string() })?);
        }
        Ok(Self::new(rules))
    }

    /// The reply the stub gives when no rule fires.
    pub fn default_reply(&self, report_text: &str) -> String {
        let labels = self.labeler.label_text(report_text).project_binary(UncertainPolicy::UncertainAsPositive);
        format_labels_json(&labels)
    }
}

impl LabelService for ScriptedService {
    fn complete(&self, request: &LabelerRequest) -> Result<String, ServiceError> {
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency);
        }
        let text = &request.report_text;
        let attempt = {
            let mut map = self.attempts.lock().expect("stub mutex poisoned");
            let n = map.entry(text.clone()).or_insert(0);
            *n += 1;
            *n
        };
        if let Some(rule) = self.rules.iter().find(|r| text.contains(&r.contains)) {
            if rule.always_fail || attempt <= rule.fail_times {
                return Err(ServiceError::Status { code: rule.status, body: "scripted failure".into() });
            }
            if let Some(reply) = &rule.response {
                return Ok(reply.clone());
            }
        }
        Ok(self.default_reply(text))
    }
}

/// A running HTTP stub; stops when dropped.
pub struct StubServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    server: Arc<tiny_http::Server>,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and serves
    /// chat-completion POSTs from `service` on a background thread.
    pub fn start(addr: &str, service: Arc<dyn LabelService>) -> Result<Self, StubError> {
        let server = Arc::new(tiny_http::Server::http(addr).map_err(|e| StubError::Bind(e.to_string()))?);
        let bound = server.server_addr().to_ip().ok_or_else(|| StubError::Bind("not an IP listener".into()))?;
        let stop = Arc::new(AtomicBool::new(false));
        let (srv, flag) = (Arc::clone(&server), Arc::clone(&stop));
        let handle = std::thread::spawn(move || {
            while !flag.load(Ordering::SeqCst) {
                match srv.recv_timeout(Duration::from_millis(50)) {
                    Ok(Some(req)) => {
                        let svc = Arc::clone(&service);
                        std::thread::spawn(move || handle_request(req, svc.as_ref()));
                    }
                    Ok(None) => {}
                    Err(_) => break,
                }
            }
        });
        Ok(StubServer { addr: bound, stop, server, handle: Some(handle) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    /// Blocks until the server thread exits (it does not by itself).
    pub fn join(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn respond(req: tiny_http::Request, code: u16, body: String) {
    let header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
    let _ = req.respond(tiny_http::Response::from_string(body).with_status_code(code).with_header(header));
}

fn handle_request(mut req: tiny_http::Request, service: &dyn LabelService) {
    if *req.method() != tiny_http::Method::Post {
        return respond(req, 405, "{\"error\":\"POST only\"}".into());
    }
    let mut body = String::new();
    if req.as_reader().read_to_string(&mut body).is_err() {
        return respond(req, 400, "{\"error\":\"unreadable body\"}".into());
    }
    let parsed = serde_json::from_str(&body).ok().and_then(|v| LabelerRequest::from_wire(&v));
    let Some(request) = parsed else {
        return respond(req, 400, "{\"error\":\"expected a chat-completion request\"}".into());
    };
    match service.complete(&request) {
        Ok(text) => respond(req, 200, wrap_completion(&text).to_string()),
        Err(ServiceError::Status { code, body }) => respond(req, code, serde_json::json!({"error": body}).to_string()),
        Err(e) => respond(req, 502, serde_json::json!({"error": e.to_string()}).to_string()),
    }
}
