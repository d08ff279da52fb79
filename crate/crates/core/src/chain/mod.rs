//! Threat models and their sub-question chains.
//!
//! A chain is data: a manifest listing sub-question ids in order, plus one
//! `.sq` file per id. See [`parse_sub_question`] for the file format.

mod builtin;
mod decompose;
mod validate;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use builtin::{builtin_chain, builtin_files};
pub use decompose::{
    decompose, design_facts, encoding_text, transition_line, AssetInfo, BoundChain, BoundQuestion, DecomposeError, Segment, DESIGN_FACT_NAMES,
};
pub use validate::{validate_chain, ChainDiagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ThreatId {
    UnusedStates,
    StateTransition,
    InfoLeakage,
    IncorrectInit,
}

impl ThreatId {
    pub const ALL: [ThreatId; 4] =
        [ThreatId::UnusedStates, ThreatId::StateTransition, ThreatId::InfoLeakage, ThreatId::IncorrectInit];

    pub fn id(self) -> &'static str {
        match self {
            ThreatId::UnusedStates => "unused_states",
            ThreatId::StateTransition => "state_transition",
            ThreatId::InfoLeakage => "info_leakage",
            ThreatId::IncorrectInit => "incorrect_init",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ThreatId::UnusedStates => "Unused states in FSM",
            ThreatId::StateTransition => "FSM state transition logic",
            ThreatId::InfoLeakage => "Information leakage",
            ThreatId::IncorrectInit => "Incorrect initialization",
        }
    }

    pub fn reference(self) -> &'static str {
        match self {
            ThreatId::UnusedStates => "CWE-1245",
            ThreatId::StateTransition => "RCD-011",
            ThreatId::InfoLeakage => "CWE-200",
            ThreatId::IncorrectInit => "CWE-1271",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ThreatId::ALL.into_iter().find(|t| t.id() == s.trim())
    }
}

impl fmt::Display for ThreatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Identifier,
    IdentifierList,
    /// One sized constant, or a comma-separated list of them.
    BitConstant,
    Expression,
    CodeBlock,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Identifier => "identifier",
            FieldKind::IdentifierList => "identifier_list",
            FieldKind::BitConstant => "bit_constant",
            FieldKind::Expression => "expression",
            FieldKind::CodeBlock => "code_block",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "identifier" => FieldKind::Identifier,
            "identifier_list" => FieldKind::IdentifierList,
            "bit_constant" => FieldKind::BitConstant,
            "expression" => FieldKind::Expression,
            "code_block" => FieldKind::CodeBlock,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubQuestion {
    pub id: String,
    /// 1-based position in the chain.
    pub index: usize,
    pub question_template: String,
    pub valid_examples: Vec<Example>,
    /// Exactly one in a valid chain; kept as a list so violations can be
    /// reported instead of rejected at parse time.
    pub invalid_examples: Vec<Example>,
    pub extract_schema: Vec<(String, FieldKind)>,
    pub carry_forward: Vec<String>,
    pub is_asset_producer: bool,
    pub is_codegen: bool,
}

impl SubQuestion {
    pub fn field_kind(&self, field: &str) -> Option<FieldKind> {
        self.extract_schema.iter().find(|(f, _)| f == field).map(|(_, k)| *k)
    }

    /// `{snake_case}` names in the question template, in order of first use.
    pub fn placeholders(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for seg in Segment::split(&self.question_template) {
            if let Segment::Placeholder(p) = seg {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatChain {
    pub threat: ThreatId,
    pub sub_questions: Vec<SubQuestion>,
}

impl ThreatChain {
    pub fn producer(&self) -> Option<&SubQuestion> {
        self.sub_questions.iter().find(|q| q.is_asset_producer)
    }

    pub fn codegen(&self) -> Option<&SubQuestion> {
        self.sub_questions.iter().find(|q| q.is_codegen)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{line}: {message}")]
pub struct ChainFormatError {
    pub file: String,
    pub line: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("ChainFormatError: {0}")]
    Format(#[from] ChainFormatError),
    #[error("ChainValidationError: sub-question '{sub_question}': {message}")]
    Validation { sub_question: String, message: String },
}

fn format_err(file: &str, line: u32, message: impl Into<String>) -> ChainFormatError {
    ChainFormatError { file: file.into(), line, message: message.into() }
}

fn parse_example(file: &str, line: u32, body: &str) -> Result<Example, ChainFormatError> {
    let text = body.trim_matches('\n');
    let Some(rest) = text.strip_prefix("Q:") else {
        return Err(format_err(file, line + 1, "example must start with 'Q:'"));
    };
    let mut question = Vec::new();
    let mut answer: Option<Vec<&str>> = None;
    for l in rest.split('\n') {
        match &mut answer {
            Some(a) => a.push(l),
            None => match l.strip_prefix("A:") {
                Some(first) => {
                    let mut a = Vec::new();
                    if !first.trim().is_empty() {
                        a.push(first.trim_start());
                    }
                    answer = Some(a);
                }
                None => question.push(l),
            },
        }
    }
    let Some(answer) = answer else {
        return Err(format_err(file, line + 1, "example has no 'A:' line"));
    };
    Ok(Example {
        question: question.join("\n").trim().to_string(),
        answer: answer.join("\n").trim_matches('\n').trim_end().to_string(),
    })
}

/// Parses one `.sq` file.
///
/// Sections start with a line `---NAME---`: `VALID` (repeated), `INVALID`,
/// `QUESTION`, `EXTRACT` (`field:kind` per line), `CARRY` (a field per
/// line), `FLAGS` (`asset_producer`, `codegen`). Examples are `Q: ...`
/// followed by an `A:` line and the answer.
pub fn parse_sub_question(id: &str, index: usize, text: &str) -> Result<SubQuestion, ChainFormatError> {
    let file = format!("{id}.sq");
    let mut sq = SubQuestion {
        id: id.into(),
        index,
        question_template: String::new(),
        valid_examples: Vec::new(),
        invalid_examples: Vec::new(),
        extract_schema: Vec::new(),
        carry_forward: Vec::new(),
        is_asset_producer: false,
        is_codegen: false,
    };
    let mut sections: Vec<(String, u32, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let n = n as u32 + 1;
        let t = line.trim_end();
        if let Some(name) = t.strip_prefix("---").and_then(|r| r.strip_suffix("---")) {
            sections.push((name.to_string(), n, String::new()));
            continue;
        }
        match sections.last_mut() {
            Some((_, _, body)) => {
                body.push_str(line.trim_end_matches('\r'));
                body.push('\n');
            }
            None if t.trim().is_empty() || t.starts_with('#') => {}
            None => return Err(format_err(&file, n, "text before the first section")),
        }
    }
    let mut has_question = false;
    for (name, line, body) in &sections {
        let lines = || {
            body.lines().enumerate().filter_map(|(i, l)| {
                let l = l.trim();
                (!l.is_empty() && !l.starts_with('#')).then_some((line + 1 + i as u32, l))
            })
        };
        match name.as_str() {
            "VALID" => sq.valid_examples.push(parse_example(&file, *line, body)?),
            "INVALID" => sq.invalid_examples.push(parse_example(&file, *line, body)?),
            "QUESTION" => {
                if has_question {
                    return Err(format_err(&file, *line, "duplicate QUESTION section"));
                }
                has_question = true;
                sq.question_template = body.trim().to_string();
            }
            "EXTRACT" => {
                for (n, l) in lines() {
                    let (field, kind) =
                        l.split_once(':').ok_or_else(|| format_err(&file, n, "expected 'field:kind'"))?;
                    let kind = FieldKind::parse(kind)
                        .ok_or_else(|| format_err(&file, n, format!("unknown field kind '{}'", kind.trim())))?;
                    sq.extract_schema.push((field.trim().to_string(), kind));
                }
            }
            "CARRY" => sq.carry_forward.extend(lines().map(|(_, l)| l.to_string())),
            "FLAGS" => {
                for (n, l) in lines() {
                    match l {
                        "asset_producer" => sq.is_asset_producer = true,
                        "codegen" => sq.is_codegen = true,
                        other => return Err(format_err(&file, n, format!("unknown flag '{other}'"))),
                    }
                }
            }
            other => return Err(format_err(&file, *line, format!("unknown section '{other}'"))),
        }
    }
    if !has_question || sq.question_template.is_empty() {
        return Err(format_err(&file, 1, "missing QUESTION section"));
    }
    if sq.extract_schema.is_empty() {
        return Err(format_err(&file, 1, "missing EXTRACT section"));
    }
    Ok(sq)
}

/// Sub-question ids listed in a manifest (blank lines and `#` comments
/// skipped).
pub fn parse_manifest(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// Builds and validates a chain. `lookup` returns the `.sq` text for an id.
pub fn load_chain(
    threat: ThreatId,
    manifest: &str,
    lookup: impl Fn(&str) -> Option<String>,
    k: usize,
) -> Result<ThreatChain, ChainError> {
    let ids = parse_manifest(manifest);
    if ids.is_empty() {
        return Err(format_err("manifest", 1, "manifest lists no sub-questions").into());
    }
    let mut sub_questions = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let text = lookup(id).ok_or_else(|| format_err("manifest", i as u32 + 1, format!("missing file {id}.sq")))?;
        sub_questions.push(parse_sub_question(id, i + 1, &text)?);
    }
    let chain = ThreatChain { threat, sub_questions };
    if let Some(d) = validate_chain(&chain, k).into_iter().next() {
        return Err(ChainError::Validation { sub_question: d.sub_question, message: d.message });
    }
    Ok(chain)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sq_text(question: &str, extract: &str, carry: &str, flags: &str, invalid: usize) -> String {
        let mut s = String::new();
        for i in 0..3 {
            s.push_str(&format!("---VALID---\nQ: example {i}\nA:\nname: m{i}\n"));
        }
        for _ in 0..invalid {
            s.push_str("---INVALID---\nQ: nothing here\nA:\nN/A - no module\n");
        }
        s.push_str(&format!("---QUESTION---\n{question}\n---EXTRACT---\n{extract}\n---CARRY---\n{carry}\n---FLAGS---\n{flags}\n"));
        s
    }

    #[test]
    fn parses_sections() {
        let sq = parse_sub_question("q", 1, &sq_text("Name of {module_name}?", "name:identifier", "name", "", 1)).unwrap();
        assert_eq!(sq.valid_examples.len(), 3);
        assert_eq!(sq.valid_examples[1], Example { question: "example 1".into(), answer: "name: m1".into() });
        assert_eq!(sq.invalid_examples[0].answer, "N/A - no module");
        assert_eq!(sq.extract_schema, [("name".to_string(), FieldKind::Identifier)]);
        assert_eq!(sq.carry_forward, ["name"]);
        assert_eq!(sq.placeholders(), ["module_name"]);
    }

    #[test]
    fn format_errors_carry_line() {
        let e = parse_sub_question("q", 1, "---QUESTION---\nx\n---EXTRACT---\nname:number\n").unwrap_err();
        assert_eq!(e.to_string(), "q.sq:4: unknown field kind 'number'");
        let e = parse_sub_question("q", 1, "---BOGUS---\n").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn threat_ids_round_trip() {
        for t in ThreatId::ALL {
            assert_eq!(ThreatId::parse(t.id()), Some(t));
        }
        assert_eq!(ThreatId::parse("bogus"), None);
    }
}
