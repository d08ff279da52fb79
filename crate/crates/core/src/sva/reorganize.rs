//! Assembles snippets into a checker module bound to the target design.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::snippet::SvaSnippet;
use crate::diag::Diagnostic;
use crate::verilog::{ModuleInfo, PortInfo};

/// A snippet plus the threat and asset it was generated for. `source` is the
/// text as emitted (after lint); it is what lands in the file, so comments
/// and layout of the original answer survive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSnippet {
    pub threat: String,
    pub asset: String,
    pub snippet: SvaSnippet,
    pub source: String,
}

impl TaggedSnippet {
    /// Uses the canonical serialization as the source text.
    pub fn canonical(threat: &str, asset: &str, snippet: SvaSnippet) -> Self {
        let source = snippet.serialize();
        TaggedSnippet { threat: threat.into(), asset: asset.into(), snippet, source }
    }
}

/// Codegen output that did not parse. It is still written to the file so
/// the file's syntax score reflects it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RejectedSnippet {
    pub threat: String,
    pub asset: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileHeader {
    pub design: String,
    pub threats: Vec<String>,
    /// Omitted from the text when `None` (reproducible mode).
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvaFile {
    pub checker_module_name: String,
    pub target_module: String,
    pub port_mirror: Vec<PortInfo>,
    pub clock: Option<String>,
    pub reset: Option<String>,
    pub snippets: Vec<TaggedSnippet>,
    pub rejected: Vec<RejectedSnippet>,
    pub bind_stmt: String,
    pub diagnostics: Vec<Diagnostic>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReorganizeError {
    #[error("UnresolvedSignal({0})")]
    UnresolvedSignal(String),
    #[error("two different snippets share the name '{0}'")]
    DuplicateName(String),
}

pub fn checker_name(module: &str) -> String {
    format!("{module}_sva_checker")
}

fn check_refs(s: &SvaSnippet, module: &ModuleInfo) -> Result<(), ReorganizeError> {
    for e in s.expressions() {
        let mut ids = Vec::new();
        e.idents(&mut ids);
        for id in ids {
            let local = match id.split_once('.') {
                Some((head, rest)) if head == module.name => rest,
                // deeper or foreign hierarchy is not checked
                Some(_) => continue,
                None => id,
            };
            if local.contains('.') {
                continue;
            }
            if !module.has_name(local) {
                return Err(ReorganizeError::UnresolvedSignal(local.to_string()));
            }
        }
    }
    Ok(())
}

fn port_decl(p: &PortInfo) -> String {
    match p.bounds {
        Some((m, l)) => format!("input [{m}:{l}] {}", p.name),
        None if p.width > 1 => format!("input [{}:0] {}", p.width - 1, p.name),
        None => format!("input {}", p.name),
    }
}

fn push_block(text: &mut String, comment: &str, body: &str) {
    let _ = writeln!(text, "\n  // {comment}");
    for line in body.trim_matches('\n').lines() {
        let line = line.trim_end();
        if line.is_empty() {
            text.push('\n');
        } else {
            let _ = writeln!(text, "  {line}");
        }
    }
}

pub fn reorganize(
    snippets: Vec<TaggedSnippet>,
    module: &ModuleInfo,
    header: &FileHeader,
) -> Result<SvaFile, ReorganizeError> {
    reorganize_with_rejected(snippets, Vec::new(), module, header)
}

/// Like [`reorganize`], with unparsable snippets appended after the parsed
/// ones.
pub fn reorganize_with_rejected(
    mut snippets: Vec<TaggedSnippet>,
    mut rejected: Vec<RejectedSnippet>,
    module: &ModuleInfo,
    header: &FileHeader,
) -> Result<SvaFile, ReorganizeError> {
    let mut diagnostics = Vec::new();
    for t in &snippets {
        check_refs(&t.snippet, module)?;
    }
    snippets.sort_by(|a, b| {
        (&a.threat, &a.asset, &a.snippet.property_name).cmp(&(&b.threat, &b.asset, &b.snippet.property_name))
    });
    let mut kept: Vec<TaggedSnippet> = Vec::new();
    for t in snippets {
        let clash = kept.iter().find(|k| {
            k.snippet.property_name == t.snippet.property_name || k.snippet.assert_label == t.snippet.assert_label
        });
        match clash {
            Some(k) if k.snippet == t.snippet => diagnostics.push(Diagnostic::note(
                1,
                format!("duplicate snippet '{}' dropped", t.snippet.property_name),
            )),
            Some(_) => return Err(ReorganizeError::DuplicateName(t.snippet.property_name)),
            None => kept.push(t),
        }
    }
    if module.clock.is_none() {
        diagnostics.push(Diagnostic::warning(module.line, format!("module '{}' has no clock", module.name)));
    }
    rejected.sort();
    rejected.dedup();
    if kept.is_empty() && rejected.is_empty() {
        diagnostics.push(Diagnostic::warning(module.line, format!("no assertions for module '{}'", module.name)));
    }

    let checker = checker_name(&module.name);
    let instance = format!("u_{}_sva", module.name);
    let bind_stmt = format!("bind {} {checker} {instance} (.*);", module.name);

    let mut text = String::new();
    let _ = writeln!(text, "// Generated by {} {}", crate::TOOL_NAME, crate::VERSION);
    let _ = writeln!(text, "// design: {}", header.design);
    let _ = writeln!(text, "// threats: {}", header.threats.join(", "));
    if let Some(ts) = &header.timestamp {
        let _ = writeln!(text, "// generated: {ts}");
    }
    let _ = write!(text, "module {checker} (");
    for (i, p) in module.ports.iter().enumerate() {
        text.push_str(if i == 0 { "\n  " } else { ",\n  " });
        text.push_str(&port_decl(p));
    }
    if !module.ports.is_empty() {
        text.push('\n');
    }
    text.push_str(");\n");
    for t in &kept {
        push_block(&mut text, &format!("{} / {}", t.threat, t.asset), &t.source);
    }
    for r in &rejected {
        diagnostics.push(Diagnostic::warning(1, format!("snippet for {} / {} does not parse", r.threat, r.asset)));
        push_block(&mut text, &format!("{} / {} (does not parse)", r.threat, r.asset), &r.text);
    }
    text.push_str("\nendmodule\n\n");
    text.push_str(&bind_stmt);
    text.push('\n');

    Ok(SvaFile {
        checker_module_name: checker,
        target_module: module.name.clone(),
        port_mirror: module.ports.clone(),
        clock: module.clock.clone(),
        reset: module.reset.as_ref().map(|r| r.signal.clone()),
        snippets: kept,
        rejected,
        bind_stmt,
        diagnostics,
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sva::{check_syntax, parse_snippet};
    use crate::verilog::parse_design;

    const FSM: &str = "module fsm(input clk, input rst, input in, output reg out);
  reg [1:0] state;
  always @(posedge clk or posedge rst) if (rst) state <= 2'b00; else state <= {state[0], in};
endmodule";

    fn header() -> FileHeader {
        FileHeader { design: "fsm".into(), threats: alloc::vec!["unused_states".into()], timestamp: None }
    }

    fn tagged(asset: &str, text: &str) -> TaggedSnippet {
        TaggedSnippet::canonical("unused_states", asset, parse_snippet(text).unwrap())
    }

    #[test]
    fn single_snippet_file() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let s = tagged(
            "2'b11",
            "property p0; @(posedge fsm.clk) fsm.state != 2'b11; endproperty a0: assert property(p0);",
        );
        let f = reorganize(alloc::vec![s], d.top(), &header()).unwrap();
        assert!(f.text.ends_with("bind fsm fsm_sva_checker u_fsm_sva (.*);\n"));
        assert!(!f.text.contains("  input [1:0] state"));
        assert!(f.text.contains("module fsm_sva_checker (\n  input clk,\n  input rst,\n  input in,\n  input out\n);"));
        assert_eq!(check_syntax(&f.text).score, 100.0);
        assert!(!f.text.contains("generated:"));
    }

    #[test]
    fn empty_body_with_diagnostic() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let f = reorganize(Vec::new(), d.top(), &header()).unwrap();
        assert!(f.diagnostics.iter().any(|d| d.message.starts_with("no assertions")));
        assert!(f.text.contains(");\n\nendmodule"));
    }

    #[test]
    fn rejected_text_lowers_the_score() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let s = tagged("a", "property pa; @(posedge fsm.clk) fsm.state != 2'b11; endproperty aa: assert property(pa);");
        let r = RejectedSnippet { threat: "unused_states".into(), asset: "b".into(), text: "property pb; fsm.state; endproperty".into() };
        let f = reorganize_with_rejected(alloc::vec![s], alloc::vec![r], d.top(), &header()).unwrap();
        assert_eq!(check_syntax(&f.text).score, 50.0);
        assert!(f.text.contains("// unused_states / b (does not parse)"));
    }

    #[test]
    fn unresolved_signal() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let s = tagged("x", "property p; @(posedge fsm.clk) fsm.bogus; endproperty a: assert property(p);");
        assert_eq!(
            reorganize(alloc::vec![s], d.top(), &header()).unwrap_err(),
            ReorganizeError::UnresolvedSignal("bogus".into())
        );
    }

    #[test]
    fn sorted_and_deterministic() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let a = tagged("b", "property pb; @(posedge fsm.clk) fsm.state != 2'b10; endproperty ab: assert property(pb);");
        let b = tagged("a", "property pa; @(posedge fsm.clk) fsm.state != 2'b11; endproperty aa: assert property(pa);");
        let f1 = reorganize(alloc::vec![a.clone(), b.clone()], d.top(), &header()).unwrap();
        let f2 = reorganize(alloc::vec![b, a], d.top(), &header()).unwrap();
        assert_eq!(f1.text, f2.text);
        assert!(f1.text.find("pa;").unwrap() < f1.text.find("pb;").unwrap());
    }
}
