//! Case-statement FSM reconstruction.
//!
//! A register `R` is a state register when a case statement switches on `R`
//! (or on a next-state register `N` with `R <= N` in a sequential block) and
//! at least two arms assign constant encodings to `R` or `N`. Transitions are
//! found by executing the block holding the case along every branch path; the
//! path condition is kept as Verilog expression text.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::ast::{AlwaysBlock, BinaryOp, Expr, Stmt, UnaryOp};
use super::clocking::{guard_signal, Polarity};
use super::consteval::{eval_const, ConstEnv};
use super::design::ModuleInfo;
use super::print::expr_to_string;
use crate::bits::mask;
use crate::diag::Diagnostic;

/// Upper bound on explored paths per block.
const MAX_PATHS: usize = 4096;

/// Largest state width accepted by [`unused_states`].
pub const MAX_ENUM_WIDTH: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDef {
    pub label: String,
    pub encoding: u128,
    /// True when the encoding only ever appears as a literal; the label is
    /// then synthesized as `STATE_<encoding>`.
    pub anonymous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: u128,
    pub to: u128,
    /// Conjunction of branch conditions; `1` when unconditional.
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsmInfo {
    pub state_register: String,
    pub next_register: Option<String>,
    pub width: u32,
    pub defined_states: Vec<StateDef>,
    pub transitions: Vec<Transition>,
    pub reset_state: Option<u128>,
    pub line: u32,
}

impl FsmInfo {
    pub fn state(&self, encoding: u128) -> Option<&StateDef> {
        self.defined_states.iter().find(|s| s.encoding == encoding)
    }

    pub fn label_of(&self, encoding: u128) -> String {
        match self.state(encoding) {
            Some(s) => s.label.clone(),
            None => synthesized_label(encoding),
        }
    }

    pub fn encodings(&self) -> Vec<u128> {
        self.defined_states.iter().map(|s| s.encoding).collect()
    }
}

pub fn synthesized_label(encoding: u128) -> String {
    format!("STATE_{encoding}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("state width {0} exceeds the enumeration limit of 16 bits")]
pub struct WidthTooLarge(pub u32);

/// Encodings in `[0, 2^width)` not used by any defined state, ascending.
pub fn unused_states(fsm: &FsmInfo) -> Result<Vec<u128>, WidthTooLarge> {
    if fsm.width > MAX_ENUM_WIDTH {
        return Err(WidthTooLarge(fsm.width));
    }
    let used = fsm.encodings();
    Ok((0..1u128 << fsm.width).filter(|v| !used.contains(v)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NextVal {
    Unassigned,
    Const(u128),
    Stay,
    Unknown,
}

#[derive(Debug, Clone)]
struct Path {
    conds: Vec<Expr>,
    cur: Option<u128>,
    next: NextVal,
}

struct Exec<'a> {
    vars: &'a [&'a str],
    env: &'a ConstEnv,
    width: u32,
    /// Reset signal and whether a true guard means reset asserted.
    reset: Option<(&'a str, Polarity)>,
    defined: &'a [u128],
    overflow: bool,
}

impl Exec<'_> {
    fn eval(&self, e: &Expr) -> Option<u128> {
        eval_const(e, self.env).map(|v| v.value & mask(self.width))
    }

    fn stmt(&mut self, s: &Stmt, paths: Vec<Path>) -> Vec<Path> {
        if paths.len() > MAX_PATHS {
            self.overflow = true;
            return paths;
        }
        match s {
            Stmt::Block { stmts, .. } => stmts.iter().fold(paths, |p, s| self.stmt(s, p)),
            Stmt::If { cond, then, otherwise } => {
                if let (Some((sig, positive)), Some((rst, pol))) = (guard_signal(cond), self.reset) {
                    if sig == rst {
                        let asserted_on_true = positive == (pol == Polarity::ActiveHigh);
                        let running = if asserted_on_true { otherwise.as_deref() } else { Some(&**then) };
                        return match running {
                            Some(b) => self.stmt(b, paths),
                            None => paths,
                        };
                    }
                }
                let mut out = Vec::new();
                let with = |paths: &[Path], c: Expr| -> Vec<Path> {
                    paths
                        .iter()
                        .map(|p| {
                            let mut p = p.clone();
                            p.conds.push(c.clone());
                            p
                        })
                        .collect()
                };
                out.extend(self.stmt(then, with(&paths, cond.clone())));
                let neg = with(&paths, negate(cond));
                match otherwise {
                    Some(o) => out.extend(self.stmt(o, neg)),
                    None => out.extend(neg),
                }
                out
            }
            Stmt::Case { expr, arms, .. } => {
                let on_state = expr.as_ident().is_some_and(|n| self.vars.contains(&n));
                let mut out = Vec::new();
                for p in paths {
                    if on_state {
                        self.state_case(arms, p, &mut out);
                    } else {
                        self.other_case(expr, arms, p, &mut out);
                    }
                }
                out
            }
            Stmt::Assign { lhs, rhs, .. } => {
                let Some(name) = lhs.as_ident() else { return paths };
                if !self.vars.contains(&name) {
                    return paths;
                }
                let mut out = Vec::new();
                for p in paths {
                    self.assign(rhs, p, &mut out);
                }
                out
            }
            Stmt::Null | Stmt::Unsupported { .. } => paths,
        }
    }

    fn assign(&mut self, rhs: &Expr, mut p: Path, out: &mut Vec<Path>) {
        if let Expr::Ternary(c, a, b) = rhs {
            let mut pa = p.clone();
            pa.conds.push((**c).clone());
            self.assign(a, pa, out);
            p.conds.push(negate(c));
            self.assign(b, p, out);
            return;
        }
        p.next = if let Some(v) = self.eval(rhs) {
            NextVal::Const(v)
        } else if rhs.as_ident().is_some_and(|n| self.vars.contains(&n)) {
            NextVal::Stay
        } else {
            NextVal::Unknown
        };
        out.push(p);
    }

    fn state_case(&mut self, arms: &[super::ast::CaseArm], p: Path, out: &mut Vec<Path>) {
        let labelled: Vec<Vec<Option<u128>>> =
            arms.iter().map(|a| a.labels.iter().map(|l| self.eval(l)).collect()).collect();
        let explicit: Vec<u128> = labelled.iter().flatten().flatten().copied().collect();
        for (i, (arm, labels)) in arms.iter().zip(&labelled).enumerate() {
            let values: Vec<u128> = if arm.labels.is_empty() {
                self.defined.iter().copied().filter(|d| !explicit.contains(d)).collect()
            } else {
                labels.iter().flatten().copied().collect()
            };
            for v in values {
                // first matching arm wins
                let shadowed = labelled[..i].iter().flatten().any(|l| *l == Some(v));
                if shadowed || p.cur.is_some_and(|c| c != v) {
                    continue;
                }
                let mut q = p.clone();
                q.cur = Some(v);
                out.extend(self.stmt(&arm.body, vec![q]));
            }
        }
    }

    fn other_case(&mut self, expr: &Expr, arms: &[super::ast::CaseArm], p: Path, out: &mut Vec<Path>) {
        let mut seen: Vec<Expr> = Vec::new();
        for arm in arms {
            let mut q = p.clone();
            if arm.labels.is_empty() {
                for l in &seen {
                    q.conds.push(Expr::Binary(BinaryOp::Ne, Box::new(expr.clone()), Box::new(l.clone())));
                }
            } else {
                let cond = arm
                    .labels
                    .iter()
                    .map(|l| Expr::Binary(BinaryOp::Eq, Box::new(expr.clone()), Box::new(l.clone())))
                    .reduce(|a, b| Expr::Binary(BinaryOp::LogOr, Box::new(a), Box::new(b)))
                    .expect("non-default arm has labels");
                q.conds.push(cond);
                seen.extend(arm.labels.iter().cloned());
            }
            out.extend(self.stmt(&arm.body, vec![q]));
        }
    }
}

fn negate(c: &Expr) -> Expr {
    match c {
        Expr::Unary(UnaryOp::Not, inner) => (**inner).clone(),
        other => Expr::Unary(UnaryOp::Not, Box::new(other.clone())),
    }
}

/// Renders a path condition as one expression text.
pub fn render_condition(conds: &[Expr]) -> String {
    match conds {
        [] => "1".to_string(),
        [one] => expr_to_string(one),
        many => {
            let parts: Vec<String> = many
                .iter()
                .map(|c| match c {
                    Expr::Binary(..) | Expr::Ternary(..) => format!("({})", expr_to_string(c)),
                    _ => expr_to_string(c),
                })
                .collect();
            parts.join(" && ")
        }
    }
}

fn walk_cases<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
    match s {
        Stmt::Block { stmts, .. } => stmts.iter().for_each(|s| walk_cases(s, out)),
        Stmt::If { then, otherwise, .. } => {
            walk_cases(then, out);
            if let Some(o) = otherwise {
                walk_cases(o, out);
            }
        }
        Stmt::Case { arms, .. } => {
            out.push(s);
            arms.iter().for_each(|a| walk_cases(&a.body, out));
        }
        _ => {}
    }
}

/// Whole-target assignments `(lhs, rhs)` in a statement, ternaries split
/// into their leaves.
fn walk_assigns<'a>(s: &'a Stmt, out: &mut Vec<(&'a str, &'a Expr)>) {
    fn leaves<'a>(name: &'a str, e: &'a Expr, out: &mut Vec<(&'a str, &'a Expr)>) {
        match e {
            Expr::Ternary(_, a, b) => {
                leaves(name, a, out);
                leaves(name, b, out);
            }
            other => out.push((name, other)),
        }
    }
    match s {
        Stmt::Block { stmts, .. } => stmts.iter().for_each(|s| walk_assigns(s, out)),
        Stmt::If { then, otherwise, .. } => {
            walk_assigns(then, out);
            if let Some(o) = otherwise {
                walk_assigns(o, out);
            }
        }
        Stmt::Case { arms, .. } => arms.iter().for_each(|a| walk_assigns(&a.body, out)),
        Stmt::Assign { lhs: Expr::Ident(n), rhs, .. } => leaves(n, rhs, out),
        _ => {}
    }
}

pub fn extract_fsms(module: &ModuleInfo) -> (Vec<FsmInfo>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let env = module.const_env();
    let blocks: Vec<&AlwaysBlock> = module.always_blocks().collect();

    let mut seq_written: Vec<&str> = Vec::new();
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for b in blocks.iter().filter(|b| b.is_sequential()) {
        let mut assigns = Vec::new();
        walk_assigns(&b.body, &mut assigns);
        for (lhs, rhs) in assigns {
            if !seq_written.contains(&lhs) {
                seq_written.push(lhs);
            }
            if let Some(n) = rhs.as_ident() {
                let is_net = module.signal(n).is_some_and(|s| !s.is_array);
                if n != lhs && is_net && !pairs.contains(&(lhs, n)) {
                    pairs.push((lhs, n));
                }
            }
        }
    }

    let mut fsms: Vec<FsmInfo> = Vec::new();
    for b in &blocks {
        let mut cases = Vec::new();
        walk_cases(&b.body, &mut cases);
        for case in cases {
            let Stmt::Case { expr, arms, .. } = case else { continue };
            let Some(x) = expr.as_ident() else { continue };
            let (reg, next) = if seq_written.contains(&x) && module.signal(x).is_some() {
                (x, pairs.iter().find(|(r, _)| *r == x).map(|(_, n)| *n))
            } else if let Some((r, n)) = pairs.iter().find(|(_, n)| *n == x) {
                (*r, Some(*n))
            } else {
                continue;
            };
            if fsms.iter().any(|f| f.state_register == reg) {
                continue;
            }
            let Some(sig) = module.signal(reg) else { continue };
            if sig.width > 128 || sig.is_array {
                continue;
            }
            let width = sig.width;
            let mut vars: Vec<&str> = vec![reg];
            vars.extend(next);
            let eval = |e: &Expr| eval_const(e, &env).map(|v| v.value & mask(width));

            let mut const_arms = 0;
            for arm in arms {
                let mut assigns = Vec::new();
                walk_assigns(&arm.body, &mut assigns);
                if assigns.iter().any(|(l, r)| vars.contains(l) && eval(r).is_some()) {
                    const_arms += 1;
                }
            }
            if const_arms < 2 {
                continue;
            }

            // labels first, then assigned encodings anywhere the state is written
            let mut found: Vec<(u128, Option<String>)> = Vec::new();
            let mut note = |v: u128, e: &Expr| {
                let named = e.as_ident().filter(|n| module.constant(n).is_some()).map(String::from);
                match found.iter_mut().find(|(enc, _)| *enc == v) {
                    Some(slot) => {
                        if slot.1.is_none() {
                            slot.1 = named;
                        }
                    }
                    None => found.push((v, named)),
                }
            };
            for arm in arms {
                for l in &arm.labels {
                    if let Some(v) = eval(l) {
                        note(v, l);
                    }
                }
            }
            for blk in &blocks {
                let mut assigns = Vec::new();
                walk_assigns(&blk.body, &mut assigns);
                for (l, r) in assigns {
                    if vars.contains(&l) {
                        if let Some(v) = eval(r) {
                            note(v, r);
                        }
                    }
                }
            }
            let mut defined_states: Vec<StateDef> = Vec::new();
            for (encoding, name) in found {
                let label = match &name {
                    Some(n) if !defined_states.iter().any(|s| s.label == *n) => n.clone(),
                    _ => synthesized_label(encoding),
                };
                defined_states.push(StateDef { label, encoding, anonymous: name.is_none() });
            }
            let encodings: Vec<u128> = defined_states.iter().map(|s| s.encoding).collect();

            let mut exec = Exec {
                vars: &vars,
                env: &env,
                width,
                reset: module.reset.as_ref().map(|r| (r.signal.as_str(), r.polarity)),
                defined: &encodings,
                overflow: false,
            };
            let start = Path { conds: Vec::new(), cur: None, next: NextVal::Unassigned };
            let paths = exec.stmt(&b.body, vec![start]);
            if exec.overflow {
                diags.push(Diagnostic::warning(
                    b.span.line,
                    format!("FSM on '{reg}': more than {MAX_PATHS} branch paths; transitions truncated"),
                ));
            }
            let mut transitions: Vec<Transition> = Vec::new();
            let mut unknown = false;
            for p in paths {
                let Some(from) = p.cur else { continue };
                let to = match p.next {
                    NextVal::Const(v) => v,
                    NextVal::Stay | NextVal::Unassigned => from,
                    NextVal::Unknown => {
                        unknown = true;
                        continue;
                    }
                };
                let t = Transition { from, to, condition: render_condition(&p.conds) };
                if !transitions.contains(&t) {
                    transitions.push(t);
                }
            }
            if unknown {
                diags.push(Diagnostic::note(
                    b.span.line,
                    format!("FSM on '{reg}': some next-state values are not constant and were skipped"),
                ));
            }
            let reset_state = module.registers.iter().find(|r| r.name == reg).and_then(|r| r.reset_value);
            let anon: Vec<&StateDef> = defined_states.iter().filter(|s| s.anonymous).collect();
            if !anon.is_empty() {
                diags.push(Diagnostic::note(
                    b.span.line,
                    format!("FSM on '{reg}': {} literal-only state(s) given synthesized labels", anon.len()),
                ));
            }
            fsms.push(FsmInfo {
                state_register: reg.to_string(),
                next_register: next.map(|n| n.to_string()),
                width,
                defined_states,
                transitions,
                reset_state,
                line: b.span.line,
            });
        }
    }

    for name in &seq_written {
        let lower = name.to_ascii_lowercase();
        if lower.contains("state") && !fsms.iter().any(|f| f.state_register == *name) {
            let line = module.signal(name).map_or(module.line, |s| s.line);
            diags.push(Diagnostic::note(
                line,
                format!("register '{name}' not extracted as an FSM: no case statement assigns it constant states"),
            ));
        }
    }
    (fsms, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parse_design;

    pub(crate) const FIXTURE: &str = "module fsm(input clk, input rst, input in, output reg out);
  localparam S0 = 2'b00, S1 = 2'b01, S2 = 2'b10;
  reg [1:0] state, next;
  always @(posedge clk or posedge rst)
    if (rst) state <= S0;
    else state <= next;
  always @(*) begin
    case (state)
      S0: if (in) next = S1; else next = S0;
      S1: next = S2;
      S2: next = S0;
      default: next = S0;
    endcase
  end
  always @(posedge clk) out <= (state == S2);
endmodule
";

    fn top(src: &str) -> ModuleInfo {
        parse_design(src, None, "t.v").unwrap().top().clone()
    }

    fn tr(from: u128, to: u128, c: &str) -> Transition {
        Transition { from, to, condition: c.into() }
    }

    #[test]
    fn two_block_fixture() {
        let m = top(FIXTURE);
        assert_eq!(m.fsms.len(), 1);
        let f = &m.fsms[0];
        assert_eq!((f.state_register.as_str(), f.next_register.as_deref(), f.width), ("state", Some("next"), 2));
        let labels: Vec<&str> = f.defined_states.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["S0", "S1", "S2"]);
        assert_eq!(f.transitions, [tr(0, 1, "in"), tr(0, 0, "!in"), tr(1, 2, "1"), tr(2, 0, "1")]);
        assert_eq!(f.reset_state, Some(0));
        assert_eq!(unused_states(f).unwrap(), [3]);
    }

    #[test]
    fn one_block_fsm_with_literals() {
        let m = top(
            "module m(input clk, input rst_n, input go, output reg [1:0] s);
               always @(posedge clk or negedge rst_n)
                 if (!rst_n) s <= 2'd0;
                 else case (s)
                   2'd0: s <= go ? 2'd1 : 2'd0;
                   2'd1: s <= 2'd3;
                   default: s <= 2'd0;
                 endcase
             endmodule",
        );
        let f = &m.fsms[0];
        let labels: Vec<&str> = f.defined_states.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["STATE_0", "STATE_1", "STATE_3"]);
        assert!(f.defined_states.iter().all(|s| s.anonymous));
        assert_eq!(f.transitions, [tr(0, 1, "go"), tr(0, 0, "!go"), tr(1, 3, "1"), tr(3, 0, "1")]);
        assert_eq!(unused_states(f).unwrap(), [2]);
    }

    #[test]
    fn case_on_input_is_not_an_fsm() {
        let m = top(
            "module m(input [1:0] sel, input a, input b, output reg y);
               always @(*) case (sel) 2'd0: y = a; 2'd1: y = b; default: y = 1'b0; endcase
             endmodule",
        );
        assert!(m.fsms.is_empty());
    }

    #[test]
    fn nested_conditions_render_as_conjunction() {
        let m = top(
            "module m(input clk, input rst, input a, input b, output reg [1:0] st);
               localparam A = 2'd0, B = 2'd1;
               always @(posedge clk)
                 if (rst) st <= A;
                 else case (st)
                   A: if (a) begin if (b || a) st <= B; end
                   B: st <= A;
                 endcase
             endmodule",
        );
        let f = &m.fsms[0];
        assert_eq!(f.transitions[0], tr(0, 1, "a && (b || a)"));
        assert_eq!(f.transitions[1], tr(0, 0, "a && !(b || a)"));
        assert_eq!(f.transitions[2], tr(0, 0, "!a"));
    }

    #[test]
    fn unused_state_bounds() {
        let mk = |width, encs: &[u128]| FsmInfo {
            state_register: "s".into(),
            next_register: None,
            width,
            defined_states: encs
                .iter()
                .map(|e| StateDef { label: synthesized_label(*e), encoding: *e, anonymous: true })
                .collect(),
            transitions: Vec::new(),
            reset_state: None,
            line: 1,
        };
        assert_eq!(unused_states(&mk(1, &[0, 1])).unwrap(), Vec::<u128>::new());
        assert_eq!(unused_states(&mk(3, &[0])).unwrap(), [1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(unused_states(&mk(17, &[0])), Err(WidthTooLarge(17)));
    }
}
