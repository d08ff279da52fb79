//! JSON-lines transcripts of backend round trips.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use svaforge_core::prompt::fingerprint;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub fingerprint: String,
    pub prompt_text: String,
    pub answer_text: String,
    /// RFC 3339.
    pub timestamp: String,
}

impl TranscriptEntry {
    pub fn new(prompt_text: &str, answer_text: &str, timestamp: String) -> Self {
        TranscriptEntry {
            fingerprint: fingerprint(prompt_text),
            prompt_text: prompt_text.into(),
            answer_text: answer_text.into(),
            timestamp,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("TranscriptCorrupt({path}:{line}): {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Appends entries; never truncates.
pub fn record_transcript(path: &Path, entries: &[TranscriptEntry]) -> Result<(), TranscriptError> {
    let w = TranscriptWriter::open(path)?;
    entries.iter().try_for_each(|e| w.append(e))
}

pub fn load_transcript(path: &Path) -> Result<Vec<TranscriptEntry>, TranscriptError> {
    let text = fs::read_to_string(path).map_err(|source| TranscriptError::Io { path: path.into(), source })?;
    let corrupt = |line, reason: String| TranscriptError::Corrupt { path: path.into(), line, reason };
    let mut out = Vec::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if !line.ends_with('\n') {
            return Err(corrupt(i + 1, "truncated final line".into()));
        }
        let e: TranscriptEntry = serde_json::from_str(line).map_err(|e| corrupt(i + 1, e.to_string()))?;
        if e.fingerprint != fingerprint(&e.prompt_text) {
            return Err(corrupt(i + 1, "fingerprint does not match prompt_text".into()));
        }
        out.push(e);
    }
    Ok(out)
}

/// Shared append handle; each entry is one locked write.
#[derive(Debug)]
pub struct TranscriptWriter {
    path: PathBuf,
    file: Mutex<File>,
}

impl TranscriptWriter {
    pub fn open(path: &Path) -> Result<Self, TranscriptError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| TranscriptError::Io { path: path.into(), source })?;
        Ok(TranscriptWriter { path: path.into(), file: Mutex::new(file) })
    }

    pub fn append(&self, e: &TranscriptEntry) -> Result<(), TranscriptError> {
        let mut line = serde_json::to_string(e).expect("transcript entries serialize");
        line.push('\n');
        let mut f = self.file.lock().unwrap_or_else(|p| p.into_inner());
        f.write_all(line.as_bytes()).map_err(|source| TranscriptError::Io { path: self.path.clone(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries() -> Vec<TranscriptEntry> {
        (0..3).map(|i| TranscriptEntry::new(&format!("prompt {i}"), &format!("a: {i}\n"), now_rfc3339())).collect()
    }

    #[test]
    fn round_trip_and_append() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        let e = entries();
        record_transcript(&p, &e).unwrap();
        assert_eq!(load_transcript(&p).unwrap(), e);
        record_transcript(&p, &e[..1]).unwrap();
        assert_eq!(load_transcript(&p).unwrap().len(), 4);
    }

    #[test]
    fn tampered_answer_still_loads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        let mut e = entries();
        e[1].answer_text = "tampered".into();
        record_transcript(&p, &e).unwrap();
        assert_eq!(load_transcript(&p).unwrap()[1].answer_text, "tampered");
    }

    #[test]
    fn truncated_line_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        record_transcript(&p, &entries()).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        fs::write(&p, &text[..text.len() - 10]).unwrap();
        match load_transcript(&p) {
            Err(TranscriptError::Corrupt { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stale_prompt_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        let mut e = entries();
        e[0].prompt_text.push('!');
        record_transcript(&p, &e).unwrap();
        assert!(matches!(load_transcript(&p), Err(TranscriptError::Corrupt { line: 1, .. })));
    }
}
