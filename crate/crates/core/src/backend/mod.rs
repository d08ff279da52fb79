//! The interface every answering backend implements, and the local oracle.

mod oracle;

use alloc::string::String;

use crate::prompt::PromptBundle;

pub use oracle::{
    clock_edge, init_property, leak_property, scoped_expr, transition_property, unused_state_property,
    OracleBackend,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    /// Transport, authentication, HTTP status or transcript problems.
    #[error("BackendError({0})")]
    Failed(String),
    #[error("OracleUnknownQuestion({0})")]
    OracleUnknownQuestion(String),
    #[error("ReplayMiss({0})")]
    ReplayMiss(String),
}

/// Answers one rendered prompt. Implementations must tolerate concurrent
/// calls from independent pipelines.
pub trait Backend: Send + Sync {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        (**self).submit(prompt)
    }
}

impl<B: Backend + ?Sized> Backend for alloc::boxed::Box<B> {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        (**self).submit(prompt)
    }
}

impl<B: Backend + ?Sized> Backend for alloc::sync::Arc<B> {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        (**self).submit(prompt)
    }
}
