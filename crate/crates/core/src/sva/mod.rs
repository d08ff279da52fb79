//! Assertion snippets: model, lint, syntax scoring and file assembly.

pub mod check;
pub mod lint;
pub mod reorganize;
pub mod snippet;

pub use check::{check_syntax, check_syntax_detailed, find_candidates, token_stream, Candidate, SyntaxScore};
pub use lint::{lint_constants, Repair, RepairKind};
pub use reorganize::{checker_name, reorganize, reorganize_with_rejected, FileHeader, RejectedSnippet, ReorganizeError, SvaFile, TaggedSnippet};
pub use snippet::{build_snippet, parse_snippet, SenseEdge, SnippetSyntaxError, SvaOperator, SvaSnippet};
