//! Register discovery and reset-initialization analysis.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Expr, Stmt};
use super::clocking::{guard_signal, unwrap_single, Polarity};
use super::consteval::eval_const;
use super::design::{assigned_names, ModuleInfo};
use crate::bits::mask;
use crate::diag::Diagnostic;

/// A signal written in an edge-triggered block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegInfo {
    pub name: String,
    pub width: u32,
    pub initialized_on_reset: bool,
    /// Present only when the reset (or declaration) value is a constant.
    pub reset_value: Option<u128>,
}

/// The statement executed while reset is asserted, for a sequential block
/// whose top-level `if` tests the module reset.
pub fn reset_branch<'a>(module: &ModuleInfo, body: &'a Stmt) -> Option<&'a Stmt> {
    let reset = module.reset.as_ref()?;
    let Stmt::If { cond, then, otherwise } = unwrap_single(body) else { return None };
    let (sig, positive) = guard_signal(cond)?;
    if sig != reset.signal {
        return None;
    }
    let true_when_asserted = positive == (reset.polarity == Polarity::ActiveHigh);
    if true_when_asserted {
        Some(then)
    } else {
        otherwise.as_deref()
    }
}

fn collect_reset_values<'a>(s: &'a Stmt, out: &mut BTreeMap<&'a str, Option<&'a Expr>>) {
    match s {
        Stmt::Block { stmts, .. } => stmts.iter().for_each(|s| collect_reset_values(s, out)),
        Stmt::If { then, otherwise, .. } => {
            collect_reset_values(then, out);
            if let Some(o) = otherwise {
                collect_reset_values(o, out);
            }
        }
        Stmt::Case { arms, .. } => arms.iter().for_each(|a| collect_reset_values(&a.body, out)),
        Stmt::Assign { lhs, rhs, .. } => match lhs {
            Expr::Ident(name) => {
                out.entry(name.as_str()).or_insert(Some(rhs));
            }
            other => {
                if let Some(name) = other.target_name() {
                    out.entry(name).or_insert(None);
                }
            }
        },
        Stmt::Null | Stmt::Unsupported { .. } => {}
    }
}

pub fn registers(module: &ModuleInfo) -> (Vec<RegInfo>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut written: BTreeMap<&str, usize> = BTreeMap::new();
    let mut reset_values: BTreeMap<&str, Option<&Expr>> = BTreeMap::new();
    for b in module.always_blocks().filter(|b| b.is_sequential()) {
        assigned_names(&b.body, &mut written);
        if let Some(branch) = reset_branch(module, &b.body) {
            collect_reset_values(branch, &mut reset_values);
        }
    }
    let env = module.const_env();
    let mut regs = Vec::new();
    let mut names: Vec<&str> = written.keys().copied().collect();
    names.sort_by_key(|n| module.signal_order(n));
    for name in names {
        let Some(sig) = module.signal(name) else {
            diags.push(Diagnostic::warning(module.line, format!("register '{name}' is not declared")));
            continue;
        };
        if sig.is_array {
            diags.push(Diagnostic::note(sig.line, format!("memory '{name}' excluded from register analysis")));
            continue;
        }
        let width = sig.width.min(128);
        let eval = |e: &Expr| eval_const(e, &env).map(|v| v.value & mask(width));
        let (initialized_on_reset, reset_value) = match reset_values.get(name) {
            Some(rhs) => (true, rhs.and_then(eval)),
            None => match &sig.init {
                Some(init) => (true, eval(init)),
                None => (false, None),
            },
        };
        regs.push(RegInfo { name: name.into(), width, initialized_on_reset, reset_value });
    }
    (regs, diags)
}

/// Registers neither assigned under a reset branch nor given a declaration
/// initializer.
pub fn uninitialized_registers(module: &ModuleInfo) -> (Vec<RegInfo>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    if module.reset.is_none() {
        diags.push(Diagnostic::warning(module.line, format!("no reset found in module '{}'", module.name)));
    }
    let regs = module.registers.iter().filter(|r| !r.initialized_on_reset).cloned().collect();
    (regs, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parse_design;

    fn top(src: &str) -> ModuleInfo {
        parse_design(src, None, "t.v").unwrap().top().clone()
    }

    #[test]
    fn reset_branch_marks_initialization() {
        let m = top(
            "module m(input clk, input rst, input d, output reg out);
               localparam S0 = 2'b01;
               reg [1:0] state;
               always @(posedge clk or posedge rst)
                 if (rst) state <= S0; else begin state <= {state[0], d}; out <= d; end
             endmodule",
        );
        let (uninit, diags) = uninitialized_registers(&m);
        assert!(diags.is_empty());
        assert_eq!(uninit.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(), ["out"]);
        let state = m.registers.iter().find(|r| r.name == "state").unwrap();
        assert_eq!((state.initialized_on_reset, state.reset_value, state.width), (true, Some(1), 2));
    }

    #[test]
    fn active_low_reset_in_else_branch() {
        let m = top(
            "module m(input clk, input rst_n, output reg [3:0] q);
               always @(posedge clk or negedge rst_n)
                 if (rst_n) q <= q + 1; else q <= 4'hA;
             endmodule",
        );
        assert_eq!(m.registers[0].reset_value, Some(10));
    }

    #[test]
    fn no_reset_lists_everything() {
        let m = top(
            "module m(input clk, input d, output reg a, output reg b);
               always @(posedge clk) begin a <= d; b <= a; end
             endmodule",
        );
        let (uninit, diags) = uninitialized_registers(&m);
        assert_eq!(uninit.len(), 2);
        assert_eq!(diags[0].message, "no reset found in module 'm'");
    }

    #[test]
    fn declaration_initializer_counts() {
        let m = top(
            "module m(input clk, input d, output q);
               reg r = 1'b1;
               always @(posedge clk) r <= d;
               assign q = r;
             endmodule",
        );
        let (uninit, _) = uninitialized_registers(&m);
        assert!(uninit.is_empty());
        assert_eq!(m.registers[0].reset_value, Some(1));
    }
}
