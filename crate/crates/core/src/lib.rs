//! Core of `svaforge`: turns hardware-security requirements plus RTL into
//! SystemVerilog assertion files by walking threat-specific chains of
//! sub-questions.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs; file IO, HTTP backends, transcripts and the command line live in
//! the `svaforge` companion crate.
//!
//! Layout:
//! - [`verilog`]: Verilog-2001 subset parser and the structural analyses
//!   (clock/reset discovery, FSM reconstruction, unused states, reset
//!   initialization, sensitive-signal marking).
//! - [`chain`]: threat models, sub-question templates and the decomposer.
//! - [`prompt`]: prompt rendering and answer extraction.
//! - [`backend`]: the backend trait and the deterministic oracle backend.
//! - [`sva`]: the assertion snippet model, constant lint, syntax scoring and
//!   the reorganizer that emits the bound checker module.
//! - [`eval`]: functionality/syntax scoring and run-to-run consistency.
//! - [`sofi`]: AES round-key byte-range assertions.
//! - [`pipeline`]: one (design, threat) cell end to end.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod backend;
pub mod bits;
pub mod chain;
pub mod diag;
pub mod eval;
pub mod lex;
pub mod pipeline;
pub mod prompt;
pub mod sofi;
pub mod sva;
pub mod verilog;

pub use backend::{Backend, BackendError, OracleBackend};
pub use bits::BitConstant;
pub use chain::{AssetInfo, BoundChain, SubQuestion, ThreatChain, ThreatId};
pub use diag::{Diagnostic, Level};
pub use pipeline::{run_cell, CellOutput, CellError};
pub use prompt::{AnswerRecord, AnswerStatus, PromptBundle, PromptConfig};
pub use sva::{SvaSnippet, TaggedSnippet};
pub use verilog::{parse_design, DesignModel, FsmInfo, ModuleInfo, RegInfo};

/// Tool name used in generated file headers.
pub const TOOL_NAME: &str = "svaforge";
/// Crate version, for generated file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
