//! Std companion of `svaforge-core`: corpus manifests, transcripts, HTTP and
//! replay backends, and the `svaforge` command line.

#![warn(missing_debug_implementations)]

use std::io;
use std::path::{Path, PathBuf};

pub mod backends;
pub mod chains;
pub mod cli;
pub mod corpus;
pub mod run;
pub mod transcript;

pub use backends::{BackendDescriptor, BackendKind, HttpBackend, RecordingBackend, ReplayBackend};
pub use corpus::{load_corpus, CorpusEntry};
pub use run::{RunConfig, RunSummary};
pub use transcript::{load_transcript, record_transcript, TranscriptEntry, TranscriptError};

/// Problems with the invocation itself; the CLI exits with status 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {msg}")]
    Manifest { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Design(String),
    #[error("{0}")]
    Chain(String),
    #[error("{0}")]
    Backend(String),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error("{0}")]
    Usage(String),
}

impl ConfigError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        ConfigError::Io { path: path.into(), source }
    }
}
