//! Deterministic backend that answers every shipped sub-question from the
//! design's static analysis. It is the ground truth for tests and CI.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Backend, BackendError};
use crate::bits::BitConstant;
use crate::chain::{encoding_text, transition_line};
use crate::prompt::PromptBundle;
use crate::sva::{build_snippet, SenseEdge, SvaSnippet};
use crate::verilog::ast::{Edge, Expr, Number};
use crate::verilog::print::expr_to_string;
use crate::verilog::{
    leak_targets, parse_expression, sensitive_signals, unused_states, DesignModel, FsmInfo, ModuleInfo, Polarity,
    ResetKind, DEFAULT_SENSITIVE_PATTERNS,
};

#[derive(Debug, Clone)]
pub struct OracleBackend {
    module: ModuleInfo,
    extra_sensitive: Vec<String>,
}

fn na(reason: &str) -> String {
    format!("N/A - {reason}")
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "none".into()
    } else {
        items.join(", ")
    }
}

fn code(field: &str, lang: &str, body: &str) -> String {
    format!("{field}:\n```{lang}\n{body}\n```")
}

/// Edge the clock is used with in the first sequential block naming it.
pub fn clock_edge(m: &ModuleInfo) -> SenseEdge {
    let Some(clock) = m.clock.as_deref() else { return SenseEdge::Posedge };
    for b in m.always_blocks() {
        if let Some(edges) = b.edges() {
            if let Some((e, _)) = edges.iter().find(|(_, s)| *s == clock) {
                return match e {
                    Edge::Posedge => SenseEdge::Posedge,
                    Edge::Negedge => SenseEdge::Negedge,
                };
            }
        }
    }
    SenseEdge::Posedge
}

/// Expression text with signals made hierarchical (`m.sig`) and named
/// constants replaced by their sized value.
pub fn scoped_expr(m: &ModuleInfo, e: &Expr) -> String {
    let mapped = e.map_idents(&|name: &str| match m.constant(name) {
        Some(c) => {
            let width = c.width.clamp(1, 128);
            let value = c.value & crate::bits::mask(width);
            Expr::Number(Number::parse(&BitConstant { width, value }.to_string()))
        }
        None if name.contains('.') => Expr::ident(name),
        None => Expr::Ident(format!("{}.{name}", m.name)),
    });
    expr_to_string(&mapped)
}

fn clock_text(m: &ModuleInfo) -> String {
    format!("{}.{}", m.name, m.clock.as_deref().unwrap_or("clk"))
}

fn reset_text(m: &ModuleInfo) -> Option<String> {
    m.reset.as_ref().map(|r| r.asserted_expr(&format!("{}.", m.name)))
}

fn snippet(m: &ModuleInfo, name: &str, disable: bool, body: &str) -> SvaSnippet {
    let dis = if disable { reset_text(m) } else { None };
    build_snippet(name, clock_edge(m), &clock_text(m), dis.as_deref(), body, &format!("assert_{name}"))
        .expect("oracle snippets are well formed")
}

pub fn unused_state_property(m: &ModuleInfo, fsm: &FsmInfo, encoding: u128) -> SvaSnippet {
    let name = format!("unused_state_{}_{encoding}", fsm.state_register);
    let body = format!("{}.{} != {}", m.name, fsm.state_register, encoding_text(fsm, encoding));
    snippet(m, &name, true, &body)
}

/// Property for the `index`-th transition of `fsm`.
pub fn transition_property(m: &ModuleInfo, fsm: &FsmInfo, index: usize) -> SvaSnippet {
    let t = &fsm.transitions[index];
    let reg = format!("{}.{}", m.name, fsm.state_register);
    let mut left = format!("{reg} == {}", encoding_text(fsm, t.from));
    if t.condition != "1" {
        let cond = parse_expression(&t.condition).expect("rendered conditions parse");
        left = format!("{left} && ({})", scoped_expr(m, &cond));
    }
    let body = format!("{left} |=> {reg} == {}", encoding_text(fsm, t.to));
    snippet(m, &format!("transition_{}_t{index}", fsm.state_register), true, &body)
}

pub fn leak_property(m: &ModuleInfo, signal: &str, targets: &[String]) -> SvaSnippet {
    let terms: Vec<String> = targets.iter().map(|o| format!("{0}.{o} != {0}.{signal}", m.name)).collect();
    snippet(m, &format!("no_leak_{signal}"), true, &terms.join(" && "))
}

/// `value` is `None` for registers reset does not set to a constant.
pub fn init_property(m: &ModuleInfo, register: &str, value: Option<&str>) -> SvaSnippet {
    let reg = format!("{}.{register}", m.name);
    let check = match value {
        Some(v) => format!("{reg} == {v}"),
        None => format!("!$isunknown({reg})"),
    };
    // without a reset only the known-value check is meaningful
    let body = match reset_text(m) {
        Some(r) => format!("{r} |=> {check}"),
        None => format!("!$isunknown({reg})"),
    };
    snippet(m, &format!("init_{register}"), false, &body)
}

fn sva_answer(s: &SvaSnippet) -> String {
    code("sva", "systemverilog", &s.serialize())
}

impl OracleBackend {
    pub fn new(module: ModuleInfo, extra_sensitive: Vec<String>) -> Self {
        OracleBackend { module, extra_sensitive }
    }

    pub fn for_design(design: &DesignModel, extra_sensitive: &[String]) -> Self {
        Self::new(design.top().clone(), extra_sensitive.to_vec())
    }

    fn fsm(&self) -> Result<&FsmInfo, String> {
        self.module.fsms.first().ok_or_else(|| na("no FSM in this module"))
    }

    fn sensitive(&self) -> Vec<String> {
        sensitive_signals(&self.module, DEFAULT_SENSITIVE_PATTERNS, &self.extra_sensitive)
    }

    fn leak_lines(&self) -> Vec<String> {
        self.sensitive()
            .into_iter()
            .filter_map(|s| {
                let t = leak_targets(&self.module, &s);
                (!t.is_empty()).then(|| format!("{s} -> {}", t.join(", ")))
            })
            .collect()
    }

    fn reset_value_lines(&self) -> Vec<String> {
        self.module
            .registers
            .iter()
            .map(|r| {
                let v = match (r.initialized_on_reset, r.reset_value) {
                    (true, Some(v)) => BitConstant { width: r.width, value: v }.to_string(),
                    (true, None) => "nonconstant".into(),
                    (false, _) => "uninitialized".into(),
                };
                format!("{} = {v}", r.name)
            })
            .collect()
    }

    /// The answer for sub-question `id`; `carried` looks up bound fields
    /// (the current asset for codegen questions).
    pub fn answer<'a>(&self, id: &str, carried: impl Fn(&str) -> Option<&'a str>) -> Result<String, BackendError> {
        let m = &self.module;
        let asset = || carried("asset").map(str::trim).unwrap_or_default().to_string();
        let text = match id {
            "module_name" => format!("module: {}", m.name),
            "io_ports" => {
                let ins: Vec<String> = m.inputs().map(|p| p.name.clone()).collect();
                let outs: Vec<String> = m.outputs().map(|p| p.name.clone()).collect();
                format!("inputs: {}\noutputs: {}", list(&ins), list(&outs))
            }
            "clock_reset" => match &m.clock {
                None => na("no clock found"),
                Some(c) => {
                    let r = m.reset.as_ref().map_or("none", |r| r.signal.as_str());
                    format!("clock: {c}\nreset: {r}")
                }
            },
            "reset_polarity" => match &m.reset {
                None => "reset_polarity: none\nreset_kind: none".into(),
                Some(r) => {
                    let p = match r.polarity {
                        Polarity::ActiveHigh => "active_high",
                        Polarity::ActiveLow => "active_low",
                    };
                    let k = match r.kind {
                        ResetKind::Sync => "sync",
                        ResetKind::Async => "async",
                    };
                    format!("reset_polarity: {p}\nreset_kind: {k}")
                }
            },
            "property_format" => format!(
                "edge: {}\ndisable_condition: {}",
                clock_edge(m).keyword(),
                reset_text(m).unwrap_or_else(|| "1'b0".into())
            ),
            "init_property_format" => format!(
                "edge: {}\nreset_condition: {}",
                clock_edge(m).keyword(),
                reset_text(m).unwrap_or_else(|| "1'b0".into())
            ),
            "state_register" => match self.fsm() {
                Ok(f) => format!("state_register: {}\nstate_width: {}", f.state_register, f.width),
                Err(e) => e,
            },
            "defined_states" | "state_encodings" => match self.fsm() {
                Ok(f) => {
                    let e: Vec<String> = f.defined_states.iter().map(|d| encoding_text(f, d.encoding)).collect();
                    format!("state_encodings: {}", e.join(", "))
                }
                Err(e) => e,
            },
            "state_labels" => match self.fsm() {
                Ok(f) => {
                    let l: Vec<String> = f.defined_states.iter().map(|d| d.label.clone()).collect();
                    format!("state_labels: {}", l.join(", "))
                }
                Err(e) => e,
            },
            "unused_states" => match self.fsm() {
                Ok(f) => match unused_states(f) {
                    Ok(u) if u.is_empty() => na("every encoding is a defined state"),
                    Ok(u) => {
                        let e: Vec<String> = u.iter().map(|&v| encoding_text(f, v)).collect();
                        format!("unused_states: {}", e.join(", "))
                    }
                    Err(_) => na("state register too wide to enumerate"),
                },
                Err(e) => e,
            },
            "transition_inputs" => match self.fsm() {
                Ok(f) => format!("transition_inputs: {}", list(&transition_inputs(m, f))),
                Err(e) => e,
            },
            "transitions" => match self.fsm() {
                Ok(f) if f.transitions.is_empty() => na("no transitions found"),
                Ok(f) => {
                    let rows: Vec<String> = f.transitions.iter().map(|t| transition_line(f, t)).collect();
                    code("transitions", "text", &rows.join("\n"))
                }
                Err(e) => e,
            },
            "transition_operator" => "implication: non_overlapped".into(),
            "observable_outputs" => {
                let outs: Vec<String> = m.outputs().map(|p| p.name.clone()).collect();
                format!("observable_outputs: {}", list(&outs))
            }
            "candidates" => {
                let s = self.sensitive();
                if s.is_empty() {
                    na("no sensitive signals")
                } else {
                    format!("sensitive_signals: {}", s.join(", "))
                }
            }
            "signal_widths" => {
                let mut names = self.sensitive();
                names.extend(m.outputs().map(|p| p.name.clone()));
                let rows: Vec<String> = names
                    .iter()
                    .filter_map(|n| m.signal(n).map(|s| format!("{n}: {}", s.width)))
                    .collect();
                code("widths", "text", &rows.join("\n"))
            }
            "leak_paths" => {
                let lines = self.leak_lines();
                if lines.is_empty() {
                    na("no sensitive signal has an output of matching width")
                } else {
                    code("leak_paths", "text", &lines.join("\n"))
                }
            }
            "registers" => {
                let r: Vec<String> = m.registers.iter().map(|r| r.name.clone()).collect();
                if r.is_empty() {
                    na("no registers")
                } else {
                    format!("registers: {}", r.join(", "))
                }
            }
            "reset_values" => {
                let lines = self.reset_value_lines();
                if lines.is_empty() {
                    na("no registers")
                } else {
                    code("reset_values", "text", &lines.join("\n"))
                }
            }
            "unused_state_sva" => {
                let f = self.fsm().map_err(|_| BackendError::OracleUnknownQuestion(id.into()))?;
                let a = asset();
                let enc = BitConstant::parse(&a).map_err(|_| unknown_asset(id, &a))?;
                sva_answer(&unused_state_property(m, f, enc.value))
            }
            "transition_sva" => {
                let f = self.fsm().map_err(|_| BackendError::OracleUnknownQuestion(id.into()))?;
                let a = asset();
                let idx =
                    f.transitions.iter().position(|t| transition_line(f, t) == a).ok_or_else(|| unknown_asset(id, &a))?;
                sva_answer(&transition_property(m, f, idx))
            }
            "leak_sva" => {
                let a = asset();
                let (sig, outs) = a.split_once("->").ok_or_else(|| unknown_asset(id, &a))?;
                let targets: Vec<String> = outs.split(',').map(|s| s.trim().to_string()).collect();
                sva_answer(&leak_property(m, sig.trim(), &targets))
            }
            "init_sva" => {
                let a = asset();
                let (reg, v) = a.split_once('=').ok_or_else(|| unknown_asset(id, &a))?;
                let v = v.trim();
                let value = BitConstant::parse(v).is_ok().then_some(v);
                sva_answer(&init_property(m, reg.trim(), value))
            }
            other => return Err(BackendError::OracleUnknownQuestion(other.into())),
        };
        Ok(text)
    }
}

fn unknown_asset(id: &str, asset: &str) -> BackendError {
    BackendError::OracleUnknownQuestion(format!("{id} (asset '{asset}')"))
}

/// Signals read by the FSM's transition conditions, in declaration order.
pub(crate) fn transition_inputs(m: &ModuleInfo, f: &FsmInfo) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for t in &f.transitions {
        if let Ok(e) = parse_expression(&t.condition) {
            let mut ids = Vec::new();
            e.idents(&mut ids);
            for id in ids {
                if m.constant(id).is_none() && !names.iter().any(|n| n == id) {
                    names.push(id.to_string());
                }
            }
        }
    }
    names.sort_by_key(|n| m.signal_order(n));
    names
}

impl Backend for OracleBackend {
    fn submit(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        self.answer(&prompt.sub_question_id, |f| prompt.carried(f))
    }
}
