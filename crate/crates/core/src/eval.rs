//! Scoring against oracle-derived golden assets, and run-to-run
//! consistency classification.
//!
//! Functionality is a structural proxy, not a proof: a golden asset counts
//! as matched when some parsed snippet references its signal, mentions every
//! payload constant (compared by value) and every related signal in its
//! left/right parts.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitConstant;
use crate::chain::{encoding_text, transition_line, AssetInfo, ThreatId};
use crate::sva::{check_syntax, check_syntax_detailed, token_stream, SvaSnippet};
use crate::verilog::ast::Expr;
use crate::verilog::{leak_targets, parse_expression, sensitive_signals, unused_states, ModuleInfo, DEFAULT_SENSITIVE_PATTERNS};

fn golden(threat: ThreatId, m: &ModuleInfo, name: String, signal: &str, constants: &[String], related: &[String]) -> AssetInfo {
    let mut payload = BTreeMap::new();
    payload.insert("signal".into(), signal.to_string());
    payload.insert("constants".into(), constants.join(", "));
    payload.insert("related".into(), related.join(", "));
    AssetInfo { threat, module: m.name.clone(), name, payload }
}

/// Assets a perfect run would cover, from static analysis alone.
pub fn golden_assets(m: &ModuleInfo, threat: ThreatId, extra_sensitive: &[String]) -> Vec<AssetInfo> {
    let mut out = Vec::new();
    match threat {
        ThreatId::UnusedStates => {
            if let Some(f) = m.fsms.first() {
                for v in unused_states(f).unwrap_or_default() {
                    let enc = encoding_text(f, v);
                    out.push(golden(threat, m, enc.clone(), &f.state_register, &[enc], &[]));
                }
            }
        }
        ThreatId::StateTransition => {
            if let Some(f) = m.fsms.first() {
                for t in &f.transitions {
                    let related: Vec<String> = parse_expression(&t.condition)
                        .map(|e| {
                            let mut ids = Vec::new();
                            e.idents(&mut ids);
                            let mut r: Vec<String> = Vec::new();
                            for id in ids {
                                if m.constant(id).is_none() && !r.iter().any(|x| x == id) {
                                    r.push(id.into());
                                }
                            }
                            r
                        })
                        .unwrap_or_default();
                    let consts = [encoding_text(f, t.from), encoding_text(f, t.to)];
                    out.push(golden(threat, m, transition_line(f, t), &f.state_register, &consts, &related));
                }
            }
        }
        ThreatId::InfoLeakage => {
            for s in sensitive_signals(m, DEFAULT_SENSITIVE_PATTERNS, extra_sensitive) {
                let targets = leak_targets(m, &s);
                if !targets.is_empty() {
                    out.push(golden(threat, m, s.clone(), &s, &[], &targets));
                }
            }
        }
        ThreatId::IncorrectInit => {
            for r in &m.registers {
                let consts: Vec<String> = match (m.reset.is_some(), r.initialized_on_reset, r.reset_value) {
                    (true, true, Some(v)) => alloc::vec![BitConstant { width: r.width, value: v }.to_string()],
                    _ => Vec::new(),
                };
                out.push(golden(threat, m, r.name.clone(), &r.name, &consts, &[]));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub design: String,
    pub threat: ThreatId,
    pub backend: String,
    pub functionality: f64,
    pub syntax: f64,
    pub expected_assets: usize,
    pub matched_assets: usize,
    pub snippet_count: usize,
}

struct SnippetFacts {
    names: BTreeSet<String>,
    values: BTreeSet<u128>,
}

fn collect_values(e: &Expr, m: &ModuleInfo, out: &mut BTreeSet<u128>) {
    match e {
        Expr::Number(n) => {
            if let Some(v) = n.value {
                out.insert(v);
            }
        }
        Expr::Ident(name) => {
            let local = name.rsplit('.').next().unwrap_or(name);
            if let Some(c) = m.constant(local) {
                out.insert(c.value);
            }
        }
        Expr::Str(_) => {}
        Expr::Unary(_, a) => collect_values(a, m, out),
        Expr::Binary(_, a, b) | Expr::Index(a, b) => {
            collect_values(a, m, out);
            collect_values(b, m, out);
        }
        Expr::Ternary(a, b, c) | Expr::Slice(a, b, c) => {
            collect_values(a, m, out);
            collect_values(b, m, out);
            collect_values(c, m, out);
        }
        Expr::PartSelect { base, start, width, .. } => {
            collect_values(base, m, out);
            collect_values(start, m, out);
            collect_values(width, m, out);
        }
        Expr::Concat(es) | Expr::Call(_, es) => es.iter().for_each(|e| collect_values(e, m, out)),
        Expr::Replicate(n, es) => {
            collect_values(n, m, out);
            es.iter().for_each(|e| collect_values(e, m, out));
        }
    }
}

fn facts(s: &SvaSnippet, m: &ModuleInfo) -> SnippetFacts {
    let mut names = BTreeSet::new();
    let mut values = BTreeSet::new();
    let parts = core::iter::once(s.left_part.as_str()).chain(s.right_part.as_deref());
    for p in parts {
        let Ok(e) = parse_expression(p) else { continue };
        let mut ids = Vec::new();
        e.idents(&mut ids);
        for id in ids {
            let local = match id.split_once('.') {
                Some((head, rest)) if head == m.name => rest,
                _ => id,
            };
            names.insert(local.to_string());
        }
        collect_values(&e, m, &mut values);
    }
    SnippetFacts { names, values }
}

fn split_list(s: Option<&String>) -> Vec<&str> {
    s.map(|s| s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()).unwrap_or_default()
}

fn matches(a: &AssetInfo, f: &SnippetFacts) -> bool {
    let Some(signal) = a.payload.get("signal") else { return false };
    if !f.names.contains(signal.as_str()) {
        return false;
    }
    let consts_ok = split_list(a.payload.get("constants"))
        .iter()
        .all(|c| BitConstant::parse(c).is_ok_and(|b| f.values.contains(&b.value)));
    let related_ok = split_list(a.payload.get("related")).iter().all(|r| f.names.contains(*r));
    consts_ok && related_ok
}

/// Scores one generated file for `(design, threat)` produced by `backend`.
pub fn score(
    design: &str,
    threat: ThreatId,
    backend: &str,
    generated: &str,
    golden: &[AssetInfo],
    m: &ModuleInfo,
) -> ScoreReport {
    let (syn, parsed) = check_syntax_detailed(generated);
    let all: Vec<SnippetFacts> = parsed.iter().map(|s| facts(s, m)).collect();
    let matched = golden.iter().filter(|a| all.iter().any(|f| matches(a, f))).count();
    let functionality = if golden.is_empty() { 100.0 } else { 100.0 * matched as f64 / golden.len() as f64 };
    // an empty file is syntactically fine when nothing was expected
    let syntax = if syn.total == 0 && golden.is_empty() { 100.0 } else { syn.score };
    ScoreReport {
        design: design.into(),
        threat,
        backend: backend.into(),
        functionality,
        syntax,
        expected_assets: golden.len(),
        matched_assets: matched,
        snippet_count: syn.total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Consistency {
    SameLines,
    Acceptable,
    Unacceptable,
}

impl Consistency {
    pub fn id(self) -> &'static str {
        match self {
            Consistency::SameLines => "same_lines",
            Consistency::Acceptable => "acceptable",
            Consistency::Unacceptable => "unacceptable",
        }
    }
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub design: String,
    pub runs: usize,
    pub classification: Consistency,
    /// `(i, j, category)` for every pair `i < j`.
    pub pairwise_details: Vec<(usize, usize, Consistency)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("TooFewRuns: consistency needs at least 2 outputs, got {0}")]
pub struct TooFewRuns(pub usize);

/// Category of one pair of outputs.
pub fn classify_pair(a: &str, b: &str) -> Consistency {
    if a == b {
        return Consistency::SameLines;
    }
    let usable = |t: &str| {
        let s = check_syntax(t);
        s.total == 0 || s.score == 100.0
    };
    if usable(a) && usable(b) && token_stream(a) == token_stream(b) {
        Consistency::Acceptable
    } else {
        Consistency::Unacceptable
    }
}

/// Worst pairwise category across repeated outputs of one cell.
pub fn classify_consistency(design: &str, outputs: &[String]) -> Result<ConsistencyReport, TooFewRuns> {
    if outputs.len() < 2 {
        return Err(TooFewRuns(outputs.len()));
    }
    let mut pairwise_details = Vec::new();
    for i in 0..outputs.len() {
        for j in i + 1..outputs.len() {
            pairwise_details.push((i, j, classify_pair(&outputs[i], &outputs[j])));
        }
    }
    let classification = pairwise_details.iter().map(|(_, _, c)| *c).max().unwrap_or(Consistency::SameLines);
    Ok(ConsistencyReport { design: design.into(), runs: outputs.len(), classification, pairwise_details })
}

/// Fixed-width table in the layout of a per-design results summary.
pub fn summary_table(scores: &[ScoreReport], consistency: &[(String, ThreatId, Consistency)]) -> String {
    let mut rows: Vec<[String; 6]> = alloc::vec![[
        "design".into(),
        "threat".into(),
        "backend".into(),
        "functionality".into(),
        "syntax".into(),
        "consistency".into(),
    ]];
    for s in scores {
        let c = consistency
            .iter()
            .find(|(d, t, _)| *d == s.design && *t == s.threat)
            .map_or("-".to_string(), |(_, _, c)| c.to_string());
        rows.push([
            s.design.clone(),
            s.threat.to_string(),
            s.backend.clone(),
            format!("{:.2}", s.functionality),
            format!("{:.2}", s.syntax),
            c,
        ]);
    }
    let widths: Vec<usize> = (0..6).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parse_design;

    const FSM: &str = "module fsm(input clk, input rst, input in, output reg out);
  localparam S0 = 2'b00, S1 = 2'b01, S2 = 2'b10;
  reg [1:0] state;
  always @(posedge clk or posedge rst)
    if (rst) state <= S0;
    else case (state)
      S0: if (in) state <= S1;
      S1: state <= S2;
      S2: state <= S0;
    endcase
endmodule";

    fn file(body: &str) -> String {
        format!("property p;\n  @(posedge fsm.clk) {body};\nendproperty\na: assert property(p);\n")
    }

    #[test]
    fn functionality_by_constant() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let g = golden_assets(d.top(), ThreatId::UnusedStates, &[]);
        assert_eq!(g.len(), 1);
        let ok = score("fsm", ThreatId::UnusedStates, "oracle", &file("fsm.state != 2'b11"), &g, d.top());
        assert_eq!((ok.functionality, ok.syntax), (100.0, 100.0));
        let used = score("fsm", ThreatId::UnusedStates, "oracle", &file("fsm.state != 2'b10"), &g, d.top());
        assert_eq!(used.functionality, 0.0);
        let broken = score("fsm", ThreatId::UnusedStates, "oracle", "property p; @(posedge fsm.clk) fsm.state != 2'b11;", &g, d.top());
        assert_eq!((broken.functionality, broken.syntax), (0.0, 0.0));
    }

    #[test]
    fn consistency_categories() {
        let a = file("fsm.state != 2'b11");
        let commented = format!("// note\n{a}");
        let other = file("fsm.state != 2'b10");
        let five = alloc::vec![a.clone(); 5];
        assert_eq!(classify_consistency("fsm", &five).unwrap().classification, Consistency::SameLines);
        let r = classify_consistency("fsm", &[a.clone(), commented]).unwrap();
        assert_eq!(r.classification, Consistency::Acceptable);
        assert_eq!(classify_pair(&a, &other), Consistency::Unacceptable);
        assert_eq!(classify_consistency("fsm", &[a]).unwrap_err(), TooFewRuns(1));
    }
}
