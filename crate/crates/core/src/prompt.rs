//! Prompt rendering and answer extraction.
//!
//! A prompt holds, in this order: k valid examples, one invalid example, the
//! information carried from earlier answers, and the question.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::backend::{Backend, BackendError};
use crate::bits::BitConstant;
use crate::chain::{BoundQuestion, FieldKind, Segment};
use crate::verilog::parse_expression;

pub const CORRECTIVE_SENTENCE: &str = "Answer strictly in the `field: value` format shown in the examples.";
/// List items kept when an over-budget prompt is shortened.
pub const TRUNCATE_KEEP: usize = 32;

const PREAMBLE: &str = "You are assisting with hardware security verification of an RTL design. \
Answer in exactly the format of the valid examples. If the input does not contain what the question \
asks for, answer with a line starting with N/A, as in the invalid example.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptConfig {
    pub k: usize,
    pub max_retries: u32,
    /// Maximum prompt length in characters.
    pub context_window_budget: usize,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig { k: 3, max_retries: 2, context_window_budget: 24000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub sub_question_id: String,
    pub rendered_text: String,
    /// Carried fields in the order they were exported, then asset fields.
    pub carried_info: Vec<(String, String)>,
    /// Hex SHA-256 of `rendered_text`.
    pub fingerprint: String,
}

impl PromptBundle {
    pub fn carried(&self, field: &str) -> Option<&str> {
        self.carried_info.iter().rev().find(|(k, _)| k == field).map(|(_, v)| v.as_str())
    }
}

pub fn fingerprint(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractedValue {
    Identifier(String),
    IdentifierList(Vec<String>),
    BitConstants(Vec<BitConstant>),
    Expression(String),
    CodeBlock(String),
}

impl ExtractedValue {
    /// Text used when the value is carried into later prompts.
    pub fn render(&self) -> String {
        match self {
            ExtractedValue::Identifier(s) | ExtractedValue::Expression(s) | ExtractedValue::CodeBlock(s) => s.clone(),
            ExtractedValue::IdentifierList(v) if v.is_empty() => "none".into(),
            ExtractedValue::IdentifierList(v) => v.join(", "),
            ExtractedValue::BitConstants(v) => v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "),
        }
    }

    /// List items: identifiers, constants, or non-empty code lines.
    pub fn items(&self) -> Vec<String> {
        match self {
            ExtractedValue::Identifier(s) | ExtractedValue::Expression(s) => alloc::vec![s.clone()],
            ExtractedValue::IdentifierList(v) => v.clone(),
            ExtractedValue::BitConstants(v) => v.iter().map(|c| c.to_string()).collect(),
            ExtractedValue::CodeBlock(s) => {
                s.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerStatus {
    Ok,
    InvalidInputDetected,
    ExtractionFailed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerRecord {
    pub sub_question_id: String,
    pub raw_text: String,
    pub extracted: BTreeMap<String, ExtractedValue>,
    pub status: AnswerStatus,
    pub attempts: u32,
    /// Why extraction failed, when it did.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("UnresolvedPlaceholder({0})")]
    UnresolvedPlaceholder(String),
    #[error("BudgetExceeded: prompt is {size} characters, budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("ExtractionExhausted: '{sub_question}' after {attempts} attempts: {reason}")]
    ExtractionExhausted { sub_question: String, attempts: u32, reason: String },
}

/// Shortens list-like values to [`TRUNCATE_KEEP`] items plus a count marker.
pub fn truncate_value(v: &str) -> String {
    let (items, sep): (Vec<&str>, &str) =
        if v.contains('\n') { (v.lines().collect(), "\n") } else { (v.split(", ").collect(), ", ") };
    if items.len() <= TRUNCATE_KEEP {
        return v.to_string();
    }
    let mut s = items[..TRUNCATE_KEEP].join(sep);
    let _ = write!(s, "{sep}(+{} more)", items.len() - TRUNCATE_KEEP);
    s
}

fn render_text(
    q: &BoundQuestion,
    known: &[(String, String)],
    bindings: &BTreeMap<&str, &str>,
    cfg: &PromptConfig,
    retry: bool,
) -> Result<String, PromptError> {
    let mut t = String::new();
    t.push_str(PREAMBLE);
    t.push_str("\n\n");
    for (i, ex) in q.sq.valid_examples.iter().take(cfg.k).enumerate() {
        let _ = write!(t, "=== Valid example {} ===\nQ: {}\nA:\n{}\n\n", i + 1, ex.question, ex.answer);
    }
    if let Some(ex) = q.sq.invalid_examples.first() {
        let _ = write!(t, "=== Invalid example ===\nQ: {}\nA:\n{}\n\n", ex.question, ex.answer);
    }
    t.push_str("=== Known information ===\n");
    if known.is_empty() {
        t.push_str("(none)\n");
    }
    for (k, v) in known {
        if v.contains('\n') {
            let _ = writeln!(t, "{k}:\n{v}");
        } else {
            let _ = writeln!(t, "{k}: {v}");
        }
    }
    t.push_str("\n=== Question ===\n");
    for seg in &q.segments {
        match seg {
            Segment::Text(s) => t.push_str(s),
            Segment::Placeholder(p) => {
                let v = bindings.get(p.as_str()).ok_or_else(|| PromptError::UnresolvedPlaceholder(p.clone()))?;
                t.push_str(v);
            }
        }
    }
    t.push('\n');
    if retry {
        t.push('\n');
        t.push_str(CORRECTIVE_SENTENCE);
        t.push('\n');
    }
    Ok(t)
}

/// Renders a bound question. `carried` fills the known-information block
/// and placeholders; `extra` (asset fields) is shown after it and wins on
/// name clashes.
pub fn render(
    q: &BoundQuestion,
    carried: &[(String, String)],
    extra: &[(String, String)],
    cfg: &PromptConfig,
    retry: bool,
) -> Result<PromptBundle, PromptError> {
    let mut known: Vec<(String, String)> = carried.to_vec();
    known.extend(extra.iter().cloned());
    let build = |known: &[(String, String)]| -> Result<String, PromptError> {
        let mut bindings: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in known {
            bindings.insert(k, v);
        }
        render_text(q, known, &bindings, cfg, retry)
    };
    let mut text = build(&known)?;
    if text.chars().count() > cfg.context_window_budget {
        known = known.into_iter().map(|(k, v)| (k, truncate_value(&v))).collect();
        text = build(&known)?;
        let size = text.chars().count();
        if size > cfg.context_window_budget {
            return Err(PromptError::BudgetExceeded { size, budget: cfg.context_window_budget });
        }
    }
    Ok(PromptBundle {
        sub_question_id: q.sq.id.clone(),
        fingerprint: fingerprint(&text),
        rendered_text: text,
        carried_info: known,
    })
}

fn is_identifier(s: &str) -> bool {
    let mut b = s.bytes();
    b.next().is_some_and(|c| c.is_ascii_alphabetic() || c == b'_')
        && b.all(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'$')
}

fn check_kind(kind: FieldKind, raw: &str) -> Result<ExtractedValue, String> {
    let v = raw.trim();
    match kind {
        FieldKind::Identifier => {
            if is_identifier(v) {
                Ok(ExtractedValue::Identifier(v.into()))
            } else {
                Err(format!("'{v}' is not an identifier"))
            }
        }
        FieldKind::IdentifierList => {
            if v.eq_ignore_ascii_case("none") {
                return Ok(ExtractedValue::IdentifierList(Vec::new()));
            }
            let items: Vec<&str> = v.split(',').map(str::trim).collect();
            match items.iter().find(|i| !is_identifier(i)) {
                Some(bad) => Err(format!("'{bad}' is not an identifier")),
                None => Ok(ExtractedValue::IdentifierList(items.into_iter().map(String::from).collect())),
            }
        }
        FieldKind::BitConstant => BitConstant::parse_list(v)
            .map(ExtractedValue::BitConstants)
            .map_err(|e| format!("'{v}': {e}")),
        FieldKind::Expression => match parse_expression(v) {
            Ok(_) if !v.is_empty() => Ok(ExtractedValue::Expression(v.into())),
            _ => Err(format!("'{v}' is not an expression")),
        },
        FieldKind::CodeBlock => {
            if v.is_empty() {
                Err("empty code block".into())
            } else {
                Ok(ExtractedValue::CodeBlock(raw.trim_matches('\n').into()))
            }
        }
    }
}

/// Parses `field: value` lines and fenced code blocks against a schema.
pub fn extract_info(sub_question_id: &str, answer: &str, schema: &[(String, FieldKind)]) -> AnswerRecord {
    let mut rec = AnswerRecord {
        sub_question_id: sub_question_id.into(),
        raw_text: answer.into(),
        extracted: BTreeMap::new(),
        status: AnswerStatus::Ok,
        attempts: 1,
        failure: None,
    };
    let kind_of = |f: &str| schema.iter().find(|(n, _)| n == f).map(|(_, k)| *k);
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut blocks: Vec<(Option<String>, String)> = Vec::new();
    let mut pending_name: Option<String> = None;
    let mut in_block: Option<(Option<String>, String)> = None;
    for line in answer.lines() {
        let t = line.trim();
        if let Some((name, body)) = &mut in_block {
            if t.starts_with("```") {
                blocks.push((name.take(), core::mem::take(body)));
                in_block = None;
            } else {
                body.push_str(line.trim_end());
                body.push('\n');
            }
            continue;
        }
        if t.starts_with("```") {
            in_block = Some((pending_name.take(), String::new()));
            continue;
        }
        if t.is_empty() {
            continue;
        }
        if t.starts_with("N/A") {
            rec.status = AnswerStatus::InvalidInputDetected;
            return rec;
        }
        pending_name = None;
        if let Some((f, v)) = t.split_once(':') {
            let f = f.trim();
            match kind_of(f) {
                Some(FieldKind::CodeBlock) if v.trim().is_empty() => pending_name = Some(f.into()),
                Some(_) => {
                    fields.entry(f.into()).or_insert_with(|| v.trim().into());
                }
                None => {}
            }
        }
    }
    if let Some((name, body)) = in_block {
        // unterminated fence: take what is there
        blocks.push((name, body));
    }
    for (name, body) in blocks {
        let target = match name {
            Some(n) => Some(n),
            None => schema
                .iter()
                .find(|(f, k)| *k == FieldKind::CodeBlock && !fields.contains_key(f))
                .map(|(f, _)| f.clone()),
        };
        if let Some(t) = target {
            fields.entry(t).or_insert(body);
        }
    }
    for (field, kind) in schema {
        let Some(raw) = fields.get(field) else {
            rec.status = AnswerStatus::ExtractionFailed;
            rec.failure = Some(format!("missing field '{field}'"));
            rec.extracted.clear();
            return rec;
        };
        match check_kind(*kind, raw) {
            Ok(v) => {
                rec.extracted.insert(field.clone(), v);
            }
            Err(e) => {
                rec.status = AnswerStatus::ExtractionFailed;
                rec.failure = Some(format!("field '{field}': {e}"));
                rec.extracted.clear();
                return rec;
            }
        }
    }
    rec
}

/// Renders, submits and extracts, re-asking with the corrective sentence
/// up to `max_retries` times when extraction fails.
pub fn run_sub_question(
    q: &BoundQuestion,
    carried: &[(String, String)],
    extra: &[(String, String)],
    backend: &dyn Backend,
    cfg: &PromptConfig,
) -> Result<(AnswerRecord, Vec<PromptBundle>), PromptError> {
    let mut bundles = Vec::new();
    let mut attempts = 0;
    loop {
        attempts += 1;
        let bundle = render(q, carried, extra, cfg, attempts > 1)?;
        let answer = backend.submit(&bundle)?;
        bundles.push(bundle);
        let mut rec = extract_info(&q.sq.id, &answer, &q.sq.extract_schema);
        rec.attempts = attempts;
        if rec.status != AnswerStatus::ExtractionFailed {
            return Ok((rec, bundles));
        }
        if attempts > cfg.max_retries {
            return Err(PromptError::ExtractionExhausted {
                sub_question: q.sq.id.clone(),
                attempts,
                reason: rec.failure.unwrap_or_default(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{parse_sub_question, Segment};

    fn schema(spec: &[(&str, FieldKind)]) -> Vec<(String, FieldKind)> {
        spec.iter().map(|(f, k)| (f.to_string(), *k)).collect()
    }

    #[test]
    fn field_lines() {
        let s = schema(&[("module", FieldKind::Identifier), ("clock", FieldKind::Identifier)]);
        let r = extract_info("q", "module: fsm\nclock: clk", &s);
        assert_eq!(r.status, AnswerStatus::Ok);
        assert_eq!(r.extracted["module"], ExtractedValue::Identifier("fsm".into()));
    }

    #[test]
    fn refusal_and_bad_constant() {
        let s = schema(&[("width", FieldKind::BitConstant)]);
        let r = extract_info("q", "N/A — no FSM present", &s);
        assert_eq!((r.status, r.extracted.len()), (AnswerStatus::InvalidInputDetected, 0));
        let r = extract_info("q", "width: 2'bzz", &s);
        assert_eq!(r.status, AnswerStatus::ExtractionFailed);
        let r = extract_info("q", "width: 2'b11, 2'b10", &s);
        assert_eq!(r.extracted["width"].items(), ["2'b11", "2'b10"]);
    }

    #[test]
    fn code_blocks_named_or_in_schema_order() {
        let s = schema(&[("a", FieldKind::CodeBlock), ("b", FieldKind::CodeBlock)]);
        let r = extract_info("q", "b:\n```\nsecond\n```\n```text\nfirst\n```", &s);
        assert_eq!(r.extracted["b"], ExtractedValue::CodeBlock("second".into()));
        assert_eq!(r.extracted["a"], ExtractedValue::CodeBlock("first".into()));
    }

    fn question() -> BoundQuestion {
        let mut text = String::new();
        for i in 0..3 {
            text.push_str(&format!("---VALID---\nQ: q{i}\nA:\nname: v{i}\n"));
        }
        text.push_str("---INVALID---\nQ: none\nA:\nN/A - nothing\n---QUESTION---\nAsset {asset} in {module}?\n---EXTRACT---\nname:identifier\n");
        let sq = parse_sub_question("q", 1, &text).unwrap();
        let segments = Segment::split(&sq.question_template);
        BoundQuestion { sq, segments }
    }

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn layout_and_fingerprint() {
        let q = question();
        let cfg = PromptConfig::default();
        let b = render(&q, &kv(&[("module", "fsm"), ("clock", "clk")]), &kv(&[("asset", "2'b11")]), &cfg, false).unwrap();
        let t = &b.rendered_text;
        let pos = |s: &str| t.find(s).unwrap();
        assert!(pos("Valid example 3") < pos("Invalid example"));
        assert!(pos("Invalid example") < pos("Known information"));
        assert!(pos("Known information") < pos("=== Question ==="));
        assert!(t.ends_with("Asset 2'b11 in fsm?\n"));
        let again = render(&q, &kv(&[("module", "fsm"), ("clock", "clk")]), &kv(&[("asset", "2'b11")]), &cfg, false).unwrap();
        assert_eq!(b.fingerprint, again.fingerprint);
        assert_eq!(b.fingerprint.len(), 64);
    }

    #[test]
    fn unresolved_placeholder() {
        let err = render(&question(), &[], &[], &PromptConfig::default(), false).unwrap_err();
        assert!(matches!(err, PromptError::UnresolvedPlaceholder(_)));
    }

    #[test]
    fn over_budget_lists_are_truncated_once() {
        let q = question();
        let long: Vec<String> = (0..200).map(|i| format!("sig{i}")).collect();
        let carried = kv(&[("module", "fsm")]);
        let mut c = carried.clone();
        c.push(("signals".into(), long.join(", ")));
        let cfg = PromptConfig { context_window_budget: 1000, ..PromptConfig::default() };
        let b = render(&q, &c, &kv(&[("asset", "a")]), &cfg, false).unwrap();
        assert!(b.rendered_text.contains("sig31, (+168 more)"));
        let tiny = PromptConfig { context_window_budget: 100, ..PromptConfig::default() };
        assert!(matches!(render(&q, &c, &kv(&[("asset", "a")]), &tiny, false), Err(PromptError::BudgetExceeded { .. })));
    }
}
