//! Clock and reset discovery from sequential-block sensitivity lists.
//!
//! Clock: a signal under `posedge`/`negedge` in some sequential block that is
//! not acting as that block's reset. A candidate named exactly `clk` or
//! `clock` (any case) wins; otherwise a single candidate is taken as is, and
//! several candidates are reported as ambiguous with the first in port order
//! chosen.
//!
//! Reset: an edge signal that guards the block's top-level `if` (async), or a
//! reset-named signal guarding the top-level `if` of a block it is not in the
//! sensitivity list of (sync). Async candidates are preferred, then port
//! order.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{BinaryOp, Edge, Expr, Stmt, UnaryOp};
use super::design::ModuleInfo;
use crate::diag::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    ActiveHigh,
    ActiveLow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResetKind {
    Sync,
    Async,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResetInfo {
    pub signal: String,
    pub polarity: Polarity,
    pub kind: ResetKind,
}

impl ResetInfo {
    /// Expression that is true while reset is asserted, with `prefix`
    /// prepended to the signal name (e.g. `fsm.`).
    pub fn asserted_expr(&self, prefix: &str) -> String {
        match self.polarity {
            Polarity::ActiveHigh => format!("{prefix}{}", self.signal),
            Polarity::ActiveLow => format!("!{prefix}{}", self.signal),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClockReset {
    pub clock: Option<String>,
    pub reset: Option<ResetInfo>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn is_reset_name(name: &str) -> bool {
    let n = name.to_ascii_lowercase();
    n.contains("rst") || n.contains("reset")
}

fn is_preferred_clock(name: &str) -> bool {
    name.eq_ignore_ascii_case("clk") || name.eq_ignore_ascii_case("clock")
}

/// Strips `begin ... end` wrappers holding a single statement.
pub fn unwrap_single(s: &Stmt) -> &Stmt {
    match s {
        Stmt::Block { stmts, .. } if stmts.len() == 1 => unwrap_single(&stmts[0]),
        other => other,
    }
}

/// For a condition testing one signal, returns the signal and whether the
/// condition is true when the signal is 1.
pub fn guard_signal(cond: &Expr) -> Option<(&str, bool)> {
    let num_nonzero = |e: &Expr| match e {
        Expr::Number(n) => n.value.map(|v| v != 0),
        _ => None,
    };
    match cond {
        Expr::Ident(s) => Some((s, true)),
        Expr::Unary(UnaryOp::Not | UnaryOp::BitNot, inner) => {
            guard_signal(inner).map(|(s, positive)| (s, !positive))
        }
        Expr::Binary(op @ (BinaryOp::Eq | BinaryOp::Ne | BinaryOp::CaseEq | BinaryOp::CaseNe), a, b) => {
            let (sig, num) = match (a.as_ident(), b.as_ident()) {
                (Some(s), None) => (s, num_nonzero(b)?),
                (None, Some(s)) => (s, num_nonzero(a)?),
                _ => return None,
            };
            let eq = matches!(op, BinaryOp::Eq | BinaryOp::CaseEq);
            Some((sig, num == eq))
        }
        _ => None,
    }
}

struct Candidate {
    name: String,
    order: usize,
    line: u32,
}

struct ResetCandidate {
    info: ResetInfo,
    order: usize,
}

pub fn detect_clock_reset(module: &ModuleInfo) -> ClockReset {
    let mut out = ClockReset::default();
    let blocks: Vec<_> = module.always_blocks().collect();
    if blocks.is_empty() {
        out.diagnostics.push(Diagnostic::warning(
            module.line,
            format!("module '{}' has no always block; no clock or reset found", module.name),
        ));
        return out;
    }
    let mut clocks: Vec<Candidate> = Vec::new();
    let mut resets: Vec<ResetCandidate> = Vec::new();
    for b in &blocks {
        let Some(edges) = b.edges() else { continue };
        let guard = match unwrap_single(&b.body) {
            Stmt::If { cond, .. } => guard_signal(cond),
            _ => None,
        };
        let mut block_resets: Vec<&str> = Vec::new();
        if let Some((sig, positive)) = guard {
            if let Some((edge, _)) = edges.iter().find(|(_, s)| *s == sig) {
                let polarity = if *edge == Edge::Posedge { Polarity::ActiveHigh } else { Polarity::ActiveLow };
                let cond_polarity = if positive { Polarity::ActiveHigh } else { Polarity::ActiveLow };
                if polarity != cond_polarity {
                    out.diagnostics.push(Diagnostic::warning(
                        b.span.line,
                        format!("reset '{sig}' edge and guard condition disagree on polarity"),
                    ));
                }
                block_resets.push(sig);
                resets.push(ResetCandidate {
                    info: ResetInfo { signal: sig.into(), polarity, kind: ResetKind::Async },
                    order: module.signal_order(sig),
                });
            } else if is_reset_name(sig) {
                let polarity = if positive { Polarity::ActiveHigh } else { Polarity::ActiveLow };
                resets.push(ResetCandidate {
                    info: ResetInfo { signal: sig.into(), polarity, kind: ResetKind::Sync },
                    order: module.signal_order(sig),
                });
            }
        }
        for (edge, sig) in &edges {
            if block_resets.contains(sig) {
                continue;
            }
            if edges.len() > 1 && is_reset_name(sig) {
                let polarity = if *edge == Edge::Posedge { Polarity::ActiveHigh } else { Polarity::ActiveLow };
                resets.push(ResetCandidate {
                    info: ResetInfo { signal: sig.to_string(), polarity, kind: ResetKind::Async },
                    order: module.signal_order(sig),
                });
                continue;
            }
            if !clocks.iter().any(|c| c.name == *sig) {
                clocks.push(Candidate { name: sig.to_string(), order: module.signal_order(sig), line: b.span.line });
            }
        }
    }
    if clocks.is_empty() && resets.is_empty() {
        out.diagnostics.push(Diagnostic::warning(
            module.line,
            format!("module '{}' has no edge-triggered block; no clock or reset found", module.name),
        ));
        return out;
    }

    clocks.sort_by_key(|c| c.order);
    let preferred: Vec<&Candidate> = clocks.iter().filter(|c| is_preferred_clock(&c.name)).collect();
    let chosen = match (preferred.first(), clocks.len()) {
        (Some(c), _) => Some(*c),
        (None, 0) => None,
        (None, 1) => clocks.first(),
        (None, _) => {
            let names: Vec<&str> = clocks.iter().map(|c| c.name.as_str()).collect();
            out.diagnostics.push(Diagnostic::warning(
                clocks[0].line,
                format!("AmbiguousClock: candidates {}; choosing '{}' by port order", names.join(", "), names[0]),
            ));
            clocks.first()
        }
    };
    match chosen {
        Some(c) if module.signal(&c.name).is_some() => out.clock = Some(c.name.clone()),
        Some(c) => out.diagnostics.push(Diagnostic::warning(
            c.line,
            format!("clock candidate '{}' is not a declared signal", c.name),
        )),
        None => out.diagnostics.push(Diagnostic::warning(module.line, "no clock found")),
    }

    resets.sort_by_key(|r| (r.info.kind == ResetKind::Sync, r.order));
    match resets.into_iter().find(|r| module.signal(&r.info.signal).is_some()) {
        Some(r) => out.reset = Some(r.info),
        None => out.diagnostics.push(Diagnostic::note(module.line, "no reset found")),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parse_design;

    fn top(src: &str) -> ModuleInfo {
        parse_design(src, None, "t.v").unwrap().top().clone()
    }

    #[test]
    fn canonical_async_reset() {
        let m = top(
            "module m(input clk, input rst, output reg q);
               always @(posedge clk or posedge rst) if (rst) q <= 0; else q <= 1;
             endmodule",
        );
        assert_eq!(m.clock.as_deref(), Some("clk"));
        assert_eq!(
            m.reset,
            Some(ResetInfo { signal: "rst".into(), polarity: Polarity::ActiveHigh, kind: ResetKind::Async })
        );
    }

    #[test]
    fn active_low_async_and_sync_resets() {
        let m = top(
            "module m(input clock, input rst_n, output reg q);
               always @(posedge clock or negedge rst_n) if (!rst_n) q <= 0; else q <= 1;
             endmodule",
        );
        assert_eq!(m.clock.as_deref(), Some("clock"));
        let r = m.reset.unwrap();
        assert_eq!((r.polarity, r.kind), (Polarity::ActiveLow, ResetKind::Async));

        let m = top(
            "module m(input clk, input reset, output reg q);
               always @(posedge clk) begin if (reset == 1'b1) q <= 0; else q <= 1; end
             endmodule",
        );
        let r = m.reset.unwrap();
        assert_eq!((r.signal.as_str(), r.polarity, r.kind), ("reset", Polarity::ActiveHigh, ResetKind::Sync));
    }

    #[test]
    fn no_always_block() {
        let m = top("module m(input a, output b); assign b = a; endmodule");
        assert_eq!((m.clock.clone(), m.reset.clone()), (None, None));
        assert!(m.diagnostics.iter().any(|d| d.message.contains("no always block")));
    }

    #[test]
    fn ambiguous_clocks_pick_port_order() {
        let m = top(
            "module m(input clk_a, input clk_b, output reg x, output reg y);
               always @(posedge clk_b) y <= 1;
               always @(posedge clk_a) x <= 1;
             endmodule",
        );
        assert_eq!(m.clock.as_deref(), Some("clk_a"));
        let d = m.diagnostics.iter().find(|d| d.message.starts_with("AmbiguousClock")).unwrap();
        assert!(d.message.contains("clk_a, clk_b"));
    }

    #[test]
    fn exact_clk_name_beats_others() {
        let m = top(
            "module m(input clk_div, input clk, output reg x, output reg y);
               always @(posedge clk_div) y <= 1;
               always @(posedge clk) x <= 1;
             endmodule",
        );
        assert_eq!(m.clock.as_deref(), Some("clk"));
        assert!(!m.diagnostics.iter().any(|d| d.message.starts_with("AmbiguousClock")));
    }

    #[test]
    fn asserted_expression() {
        let r = ResetInfo { signal: "rst_n".into(), polarity: Polarity::ActiveLow, kind: ResetKind::Async };
        assert_eq!(r.asserted_expr("top."), "!top.rst_n");
    }
}
