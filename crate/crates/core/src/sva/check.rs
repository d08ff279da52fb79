//! Tolerant scanning for snippet candidates and the syntax score.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::lint::lint_constants;
use super::snippet::{parse_snippet, SvaSnippet};
use crate::diag::Diagnostic;
use crate::lex::{tokenize_lossy, TokKind, Token};

/// A `property ... assert property(...);` region of some larger text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate<'a> {
    pub text: &'a str,
    pub line: u32,
    pub start: usize,
}

fn is_word(t: &Token<'_>, w: &str) -> bool {
    t.kind == TokKind::Ident && t.text == w
}

/// Finds snippet regions. A region starts at a `property` keyword that is
/// not part of `assert property`, and ends at the `;` closing the next
/// `assert property(...)`, or just before the next region start. Comment
/// lines directly above the keyword and a comment trailing the final `;`
/// belong to the region.
pub fn find_candidates(text: &str) -> Vec<Candidate<'_>> {
    let toks = tokenize_lossy(text);
    let starts: Vec<usize> = (0..toks.len())
        .filter(|&i| is_word(&toks[i], "property") && (i == 0 || !is_word(&toks[i - 1], "assert")))
        .collect();
    let mut out = Vec::new();
    for (n, &s) in starts.iter().enumerate() {
        let limit = starts.get(n + 1).copied().unwrap_or(toks.len());
        let mut end_tok = limit;
        let mut i = s + 1;
        while i + 1 < limit {
            if is_word(&toks[i], "assert") && is_word(&toks[i + 1], "property") {
                // through `( name ) ;`
                let mut j = i + 2;
                while j < limit && !toks[j].is(";") {
                    j += 1;
                }
                end_tok = (j + 1).min(limit);
                break;
            }
            i += 1;
        }
        let start = comment_block_start(text, toks[s].offset);
        let end = if end_tok == 0 || end_tok > toks.len() {
            text.len()
        } else if end_tok == limit && limit < toks.len() {
            // unterminated; stop before the next region's leading comments
            let next = comment_block_start(text, toks[limit].offset);
            text[..next].trim_end().len().max(toks[end_tok - 1].end())
        } else {
            line_comment_end(text, toks[end_tok - 1].end())
        };
        let line = text[..start].matches('\n').count() as u32 + 1;
        out.push(Candidate { text: &text[start..end], line, start });
    }
    out
}

fn comment_block_start(text: &str, offset: usize) -> usize {
    let line_start = text[..offset].rfind('\n').map_or(0, |p| p + 1);
    if !text[line_start..offset].trim().is_empty() {
        return offset;
    }
    let mut start = line_start;
    while start > 0 {
        let prev_start = text[..start - 1].rfind('\n').map_or(0, |p| p + 1);
        let prev = text[prev_start..start - 1].trim();
        if !prev.starts_with("//") {
            break;
        }
        start = prev_start;
    }
    start
}

fn line_comment_end(text: &str, offset: usize) -> usize {
    let rest = &text[offset..];
    let line_end = rest.find('\n').map_or(text.len(), |p| offset + p);
    let tail = text[offset..line_end].trim();
    if tail.starts_with("//") {
        text[..line_end].trim_end().len()
    } else {
        offset
    }
}

/// Outcome of [`check_syntax`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxScore {
    /// `100 * passed / total`; 0 when there are no candidates.
    pub score: f64,
    pub passed: usize,
    pub total: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Lints then parses every candidate; parsed snippets in input order.
pub fn check_syntax_detailed(text: &str) -> (SyntaxScore, Vec<SvaSnippet>) {
    let candidates = find_candidates(text);
    let mut diagnostics = Vec::new();
    let mut parsed = Vec::new();
    for c in &candidates {
        let (fixed, _) = lint_constants(c.text);
        match parse_snippet(&fixed) {
            Ok(s) => parsed.push(s),
            Err(e) => diagnostics.push(Diagnostic::error(
                c.line + e.line - 1,
                format!("snippet does not parse: expected {}", e.expected),
            )),
        }
    }
    let total = candidates.len();
    let passed = parsed.len();
    if total == 0 {
        diagnostics.push(Diagnostic::error(1, "no assertions found"));
    }
    let score = if total == 0 { 0.0 } else { 100.0 * passed as f64 / total as f64 };
    (SyntaxScore { score, passed, total, diagnostics }, parsed)
}

pub fn check_syntax(text: &str) -> SyntaxScore {
    check_syntax_detailed(text).0
}

/// Token texts with comments and whitespace removed.
pub fn token_stream(text: &str) -> Vec<String> {
    tokenize_lossy(text).iter().map(|t| String::from(t.text)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snip(n: usize) -> String {
        format!("property p{n};\n  @(posedge clk) s != 2'b1{};\nendproperty\na{n}: assert property(p{n});\n", n % 2)
    }

    #[test]
    fn all_valid() {
        let text: String = (0..4).map(snip).collect();
        let s = check_syntax(&text);
        assert_eq!((s.score, s.total), (100.0, 4));
    }

    #[test]
    fn one_missing_endproperty() {
        let mut text: String = (0..3).map(snip).collect();
        text.push_str("property bad;\n  @(posedge clk) s == 1'b0;\nab: assert property(bad);\n");
        let s = check_syntax(&text);
        assert_eq!((s.score, s.passed, s.total), (75.0, 3, 4));
        assert_eq!(s.diagnostics[0].line, 15);
        assert!(s.diagnostics[0].message.contains("'endproperty'"));
    }

    #[test]
    fn no_candidates() {
        let s = check_syntax("module m; endmodule");
        assert_eq!(s.score, 0.0);
        assert_eq!(s.diagnostics[0].message, "no assertions found");
    }

    #[test]
    fn lint_applies_before_parse() {
        let s = check_syntax("property p; @(posedge c) s != 3'b001'; endproperty a: assert property(p);");
        assert_eq!(s.score, 100.0);
    }

    #[test]
    fn regions_keep_adjacent_comments() {
        let text = "x;\n// about p\nproperty p; @(posedge c) a; endproperty l: assert property(p); // tail\nnext";
        let c = find_candidates(text);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text, "// about p\nproperty p; @(posedge c) a; endproperty l: assert property(p); // tail");
        assert_eq!(c[0].line, 2);
    }
}
