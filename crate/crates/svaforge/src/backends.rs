//! Backends that need std: HTTP chat completions, transcript replay and
//! recording.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::{json, Value};
use svaforge_core::{Backend, BackendError, PromptBundle};

use crate::transcript::{now_rfc3339, TranscriptEntry, TranscriptWriter};
use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendKind {
    Http,
    Oracle,
    Replay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub auth_env: Option<String>,
    pub transcript_path: Option<PathBuf>,
    pub temperature: f64,
}

impl BackendDescriptor {
    pub fn oracle() -> Self {
        BackendDescriptor {
            kind: BackendKind::Oracle,
            endpoint: None,
            model_name: None,
            auth_env: None,
            transcript_path: None,
            temperature: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Backend(m.into()));
        match self.kind {
            BackendKind::Http if self.endpoint.is_none() => bad("--backend http needs --endpoint"),
            BackendKind::Replay if self.transcript_path.is_none() => bad("--backend replay needs --transcript"),
            _ if self.temperature.is_nan() || self.temperature < 0.0 => bad("temperature must be >= 0"),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            BackendKind::Http => self.model_name.clone().unwrap_or_else(|| "http".into()),
            BackendKind::Oracle => "oracle".into(),
            BackendKind::Replay => "replay".into(),
        }
    }
}

/// Chat-completion client: one user message per prompt, no history.
#[derive(Debug)]
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    auth_env: Option<String>,
}

impl HttpBackend {
    pub fn new(d: &BackendDescriptor) -> Result<Self, ConfigError> {
        d.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| ConfigError::Backend(e.to_string()))?;
        Ok(HttpBackend {
            client,
            endpoint: d.endpoint.clone().unwrap_or_default(),
            model: d.model_name.clone().unwrap_or_default(),
            temperature: d.temperature,
            auth_env: d.auth_env.clone(),
        })
    }
}

impl Backend for HttpBackend {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt.rendered_text}],
        });
        let mut req = self.client.post(&self.endpoint).json(&body);
        if let Some(var) = &self.auth_env {
            let token = std::env::var(var).map_err(|_| BackendError::Failed("missing credential".into()))?;
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| BackendError::Failed(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::Failed(format!("HTTP {status}")));
        }
        let v: Value = resp.json().map_err(|e| BackendError::Failed(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .or_else(|| v.pointer("/choices/0/text"))
            .and_then(Value::as_str)
            .map(String::from)
            .ok_or_else(|| BackendError::Failed("response has no choices[0] text".into()))
    }
}

#[derive(Debug, Default)]
struct ReplayState {
    used: Vec<bool>,
    /// Next unconsumed occurrence per fingerprint.
    cursor: HashMap<String, usize>,
    next_in_order: usize,
}

/// Serves recorded answers. A fingerprint seen n times serves its n
/// recorded answers in order; unknown or exhausted fingerprints fall back
/// to the next unused entry in file order unless strict.
#[derive(Debug)]
pub struct ReplayBackend {
    entries: Vec<TranscriptEntry>,
    by_fp: HashMap<String, Vec<usize>>,
    state: Mutex<ReplayState>,
    strict: bool,
}

impl ReplayBackend {
    pub fn new(entries: Vec<TranscriptEntry>) -> Self {
        let mut by_fp: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_fp.entry(e.fingerprint.clone()).or_default().push(i);
        }
        let state = Mutex::new(ReplayState { used: vec![false; entries.len()], ..Default::default() });
        ReplayBackend { entries, by_fp, state, strict: false }
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }
}

impl Backend for ReplayBackend {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        let mut st = self.state.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(idx) = self.by_fp.get(&prompt.fingerprint) {
            let c = st.cursor.entry(prompt.fingerprint.clone()).or_insert(0);
            if let Some(&i) = idx.get(*c) {
                *c += 1;
                st.used[i] = true;
                return Ok(self.entries[i].answer_text.clone());
            }
        }
        if self.strict {
            return Err(BackendError::ReplayMiss(prompt.fingerprint.clone()));
        }
        while st.next_in_order < self.entries.len() && st.used[st.next_in_order] {
            st.next_in_order += 1;
        }
        let i = st.next_in_order;
        if i == self.entries.len() {
            return Err(BackendError::Failed("transcript underrun".into()));
        }
        st.used[i] = true;
        Ok(self.entries[i].answer_text.clone())
    }
}

/// Wraps a backend and appends every successful round trip to a transcript.
#[derive(Debug)]
pub struct RecordingBackend<B> {
    inner: B,
    writer: Arc<TranscriptWriter>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B, writer: Arc<TranscriptWriter>) -> Self {
        RecordingBackend { inner, writer }
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        let answer = self.inner.submit(prompt)?;
        let entry = TranscriptEntry::new(&prompt.rendered_text, &answer, now_rfc3339());
        self.writer.append(&entry).map_err(|e| BackendError::Failed(e.to_string()))?;
        Ok(answer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use svaforge_core::prompt::fingerprint;

    fn bundle(text: &str) -> PromptBundle {
        PromptBundle {
            sub_question_id: "q".into(),
            rendered_text: text.into(),
            carried_info: vec![],
            fingerprint: fingerprint(text),
        }
    }

    fn entry(p: &str, a: &str) -> TranscriptEntry {
        TranscriptEntry::new(p, a, "2026-01-01T00:00:00Z".into())
    }

    #[test]
    fn replay_by_fingerprint_then_in_order() {
        let r = ReplayBackend::new(vec![entry("a", "1"), entry("b", "2"), entry("a", "3"), entry("c", "4")]);
        assert_eq!(r.submit(&bundle("b")).unwrap(), "2");
        assert_eq!(r.submit(&bundle("a")).unwrap(), "1");
        assert_eq!(r.submit(&bundle("a")).unwrap(), "3");
        assert_eq!(r.submit(&bundle("zzz")).unwrap(), "4");
        assert_eq!(r.submit(&bundle("zzz")).unwrap_err(), BackendError::Failed("transcript underrun".into()));
    }

    #[test]
    fn strict_replay_misses() {
        let r = ReplayBackend::new(vec![entry("a", "1")]).strict();
        assert_eq!(r.submit(&bundle("b")).unwrap_err(), BackendError::ReplayMiss(fingerprint("b")));
    }

    fn descriptor(endpoint: String, auth_env: Option<&str>) -> BackendDescriptor {
        BackendDescriptor {
            kind: BackendKind::Http,
            endpoint: Some(endpoint),
            model_name: Some("test-model".into()),
            auth_env: auth_env.map(String::from),
            transcript_path: None,
            temperature: 0.0,
        }
    }

    #[test]
    fn http_missing_credential() {
        let b = HttpBackend::new(&descriptor("http://127.0.0.1:9/".into(), Some("SVAFORGE_TEST_UNSET_VAR"))).unwrap();
        assert_eq!(b.submit(&bundle("x")).unwrap_err(), BackendError::Failed("missing credential".into()));
    }

    #[test]
    fn http_wire_shape() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut r = BufReader::new(s.try_clone().unwrap());
            let mut len = 0;
            let mut auth = String::new();
            loop {
                let mut line = String::new();
                r.read_line(&mut line).unwrap();
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line.trim().to_string();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; len];
            r.read_exact(&mut body).unwrap();
            let reply = r#"{"choices":[{"message":{"role":"assistant","content":"module: fsm"}}]}"#;
            write!(s, "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{reply}", reply.len())
                .unwrap();
            (serde_json::from_slice::<Value>(&body).unwrap(), auth)
        });
        std::env::set_var("SVAFORGE_TEST_TOKEN", "t0k");
        let b = HttpBackend::new(&descriptor(format!("http://{addr}/v1/chat"), Some("SVAFORGE_TEST_TOKEN"))).unwrap();
        assert_eq!(b.submit(&bundle("what is the module?")).unwrap(), "module: fsm");
        let (body, auth) = server.join().unwrap();
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["messages"].as_array().unwrap().len(), 1);
        assert_eq!(body["messages"][0]["content"], "what is the module?");
        assert!(auth.ends_with("Bearer t0k"), "{auth}");
    }
}
