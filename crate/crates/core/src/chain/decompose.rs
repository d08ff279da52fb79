use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{SubQuestion, ThreatChain, ThreatId};
use crate::bits::BitConstant;
use crate::verilog::fsm::{unused_states, FsmInfo};
use crate::verilog::{sensitive_signals, DesignModel, ModuleInfo, DEFAULT_SENSITIVE_PATTERNS};

/// Placeholders filled from the design rather than from earlier answers.
pub const DESIGN_FACT_NAMES: &[&str] =
    &["rtl", "top_module", "port_list", "fsm_summary", "transition_table", "sensitive_candidates", "register_list"];

/// A piece of question text: literal, or a `{name}` slot still to fill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Placeholder(String),
}

impl Segment {
    /// Splits template text at `{snake_case}` slots. Other braces are text.
    pub fn split(template: &str) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut text = String::new();
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            let after = &rest[open + 1..];
            let name_len = after
                .bytes()
                .take_while(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || *b == b'_')
                .count();
            let valid = name_len > 0 && after.as_bytes()[0].is_ascii_lowercase() && after[name_len..].starts_with('}');
            if valid {
                text.push_str(&rest[..open]);
                if !text.is_empty() {
                    out.push(Segment::Text(core::mem::take(&mut text)));
                }
                out.push(Segment::Placeholder(after[..name_len].to_string()));
                rest = &after[name_len + 1..];
            } else {
                text.push_str(&rest[..=open]);
                rest = after;
            }
        }
        text.push_str(rest);
        if !text.is_empty() {
            out.push(Segment::Text(text));
        }
        out
    }
}

/// One asset found by the chain's producer question.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AssetInfo {
    pub threat: ThreatId,
    pub module: String,
    pub name: String,
    pub payload: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundQuestion {
    pub sq: SubQuestion,
    /// The template with design facts substituted; remaining placeholders
    /// come from carried answers.
    pub segments: Vec<Segment>,
}

impl BoundQuestion {
    pub fn open_placeholders(&self) -> Vec<&str> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Placeholder(p) => Some(p.as_str()),
                Segment::Text(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundChain {
    pub threat: ThreatId,
    pub module: String,
    pub facts: BTreeMap<String, String>,
    pub questions: Vec<BoundQuestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecomposeError {
    #[error("MissingDesignFact({0})")]
    MissingDesignFact(String),
    #[error("state register '{register}' is {width} bits wide; unused-state enumeration is limited to 16")]
    WidthTooLarge { register: String, width: u32 },
}

fn port_list(m: &ModuleInfo) -> String {
    let parts: Vec<String> = m
        .ports
        .iter()
        .map(|p| {
            let range = match p.bounds {
                Some((a, b)) => format!("[{a}:{b}] "),
                None => String::new(),
            };
            format!("{} {range}{}", p.direction.keyword(), p.name)
        })
        .collect();
    parts.join(", ")
}

pub fn encoding_text(fsm: &FsmInfo, value: u128) -> String {
    BitConstant { width: fsm.width, value }.to_string()
}

fn fsm_summary(fsm: &FsmInfo) -> String {
    let mut s = format!("state register: {} ({} bits)", fsm.state_register, fsm.width);
    if let Some(n) = &fsm.next_register {
        s.push_str(&format!(", next-state register: {n}"));
    }
    let states: Vec<String> =
        fsm.defined_states.iter().map(|d| format!("{} = {}", d.label, encoding_text(fsm, d.encoding))).collect();
    s.push_str(&format!("\nstates: {}", states.join(", ")));
    match fsm.reset_state {
        Some(r) => s.push_str(&format!("\nreset state: {}", fsm.label_of(r))),
        None => s.push_str("\nreset state: none"),
    }
    s
}

pub fn transition_line(fsm: &FsmInfo, t: &crate::verilog::Transition) -> String {
    format!("{} -> {} when {}", fsm.label_of(t.from), fsm.label_of(t.to), t.condition)
}

/// Facts available for a module, plus the group name of each fact that
/// has no value.
pub fn design_facts(
    module: &ModuleInfo,
    extra_sensitive: &[String],
) -> (BTreeMap<String, String>, BTreeMap<String, &'static str>) {
    let mut facts = BTreeMap::new();
    let mut missing = BTreeMap::new();
    facts.insert("rtl".into(), module.source.trim().to_string());
    facts.insert("top_module".into(), module.name.clone());
    facts.insert("port_list".into(), port_list(module));
    match module.fsms.first() {
        Some(fsm) => {
            facts.insert("fsm_summary".into(), fsm_summary(fsm));
            let rows: Vec<String> = fsm.transitions.iter().map(|t| transition_line(fsm, t)).collect();
            facts.insert("transition_table".into(), rows.join("\n"));
        }
        None => {
            missing.insert("fsm_summary".into(), "fsm");
            missing.insert("transition_table".into(), "fsm");
        }
    }
    let sensitive = sensitive_signals(module, DEFAULT_SENSITIVE_PATTERNS, extra_sensitive);
    if sensitive.is_empty() {
        missing.insert("sensitive_candidates".into(), "sensitive_signals");
    } else {
        facts.insert("sensitive_candidates".into(), sensitive.join(", "));
    }
    if module.registers.is_empty() {
        missing.insert("register_list".into(), "registers");
    } else {
        let names: Vec<&str> = module.registers.iter().map(|r| r.name.as_str()).collect();
        facts.insert("register_list".into(), names.join(", "));
    }
    (facts, missing)
}

/// Binds a chain's design-fact placeholders for the design's top module.
pub fn decompose(
    design: &DesignModel,
    chain: &ThreatChain,
    extra_sensitive: &[String],
) -> Result<BoundChain, DecomposeError> {
    let module = design.top();
    let (facts, missing) = design_facts(module, extra_sensitive);
    if chain.threat == ThreatId::UnusedStates {
        if let Some(fsm) = module.fsms.first() {
            if unused_states(fsm).is_err() {
                return Err(DecomposeError::WidthTooLarge { register: fsm.state_register.clone(), width: fsm.width });
            }
        }
    }
    let mut questions = Vec::new();
    for sq in &chain.sub_questions {
        let mut segments = Vec::new();
        for seg in Segment::split(&sq.question_template) {
            match seg {
                Segment::Placeholder(p) if DESIGN_FACT_NAMES.contains(&p.as_str()) => {
                    if let Some(group) = missing.get(&p) {
                        return Err(DecomposeError::MissingDesignFact(group.to_string()));
                    }
                    segments.push(Segment::Text(facts[&p].clone()));
                }
                other => segments.push(other),
            }
        }
        // merge adjacent text so rendering is a plain join
        let mut merged: Vec<Segment> = Vec::new();
        for s in segments {
            match (merged.last_mut(), s) {
                (Some(Segment::Text(a)), Segment::Text(b)) => a.push_str(&b),
                (_, s) => merged.push(s),
            }
        }
        questions.push(BoundQuestion { sq: sq.clone(), segments: merged });
    }
    Ok(BoundChain { threat: chain.threat, module: module.name.clone(), facts, questions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_placeholders_only() {
        let segs = Segment::split("a {b_1} {state[0], in} {X} {c}");
        assert_eq!(
            segs,
            [
                Segment::Text("a ".into()),
                Segment::Placeholder("b_1".into()),
                Segment::Text(" {state[0], in} {X} ".into()),
                Segment::Placeholder("c".into()),
            ]
        );
    }
}
