use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{self, Direction, Expr, Item, NetKind, PortList, Range};
use super::clocking::{detect_clock_reset, ResetInfo};
use super::consteval::{eval_const, ConstEnv, ConstVal};
use super::fsm::{extract_fsms, FsmInfo};
use super::parser::{parse_source, SyntaxError};
use super::regs::{registers, RegInfo};
use crate::diag::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DesignError {
    #[error("{path}:{err}")]
    Syntax { path: String, err: SyntaxError },
    #[error("top module '{0}' not found")]
    TopModuleNotFound(String),
    #[error("{path}:{line}: duplicate module '{name}'")]
    DuplicateModule { path: String, name: String, line: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortInfo {
    pub name: String,
    pub direction: Direction,
    pub width: u32,
    /// Declared bounds, when the range evaluated. `None` for scalars.
    pub bounds: Option<(i64, i64)>,
    pub signed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Port(Direction),
    Wire,
    Reg,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalInfo {
    pub name: String,
    pub kind: SignalKind,
    /// True when declared `reg` (including `output reg`).
    pub is_reg: bool,
    pub width: u32,
    pub bounds: Option<(i64, i64)>,
    pub is_array: bool,
    pub init: Option<Expr>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constant {
    pub name: String,
    pub width: u32,
    pub value: u128,
    pub local: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceInfo {
    pub module: String,
    pub name: String,
    pub line: u32,
}

/// Structural summary of one Verilog module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleInfo {
    pub name: String,
    pub ports: Vec<PortInfo>,
    /// Ports first (port order), then internal nets in declaration order.
    pub signals: Vec<SignalInfo>,
    pub clock: Option<String>,
    pub reset: Option<ResetInfo>,
    pub registers: Vec<RegInfo>,
    pub constants: Vec<Constant>,
    pub fsms: Vec<FsmInfo>,
    pub instances: Vec<InstanceInfo>,
    pub diagnostics: Vec<Diagnostic>,
    /// `module ... endmodule` text.
    pub source: String,
    pub line: u32,
    pub ast: ast::Module,
}

impl ModuleInfo {
    pub fn signal(&self, name: &str) -> Option<&SignalInfo> {
        self.signals.iter().find(|s| s.name == name)
    }

    pub fn port(&self, name: &str) -> Option<&PortInfo> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&Constant> {
        self.constants.iter().find(|c| c.name == name)
    }

    /// True for ports, nets and parameters.
    pub fn has_name(&self, name: &str) -> bool {
        self.signal(name).is_some() || self.constant(name).is_some()
    }

    pub fn const_env(&self) -> ConstEnv {
        self.constants
            .iter()
            .map(|c| (c.name.clone(), ConstVal { width: c.width, value: c.value, sized: true }))
            .collect()
    }

    pub fn always_blocks(&self) -> impl Iterator<Item = &ast::AlwaysBlock> {
        self.ast.items.iter().filter_map(|i| match i {
            Item::Always(b) => Some(b),
            _ => None,
        })
    }

    /// Order key used for tie-breaks: port position, then declaration order.
    pub fn signal_order(&self, name: &str) -> usize {
        self.signals.iter().position(|s| s.name == name).unwrap_or(usize::MAX)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &PortInfo> {
        self.ports.iter().filter(|p| p.direction == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &PortInfo> {
        self.ports.iter().filter(|p| p.direction == Direction::Output)
    }
}

/// A parsed design: every module of one source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignModel {
    pub source_path: String,
    pub modules: Vec<ModuleInfo>,
    pub top_module: String,
    /// Parser-level diagnostics (skipped constructs).
    pub diagnostics: Vec<Diagnostic>,
    pub line_count: u32,
}

impl DesignModel {
    pub fn top(&self) -> &ModuleInfo {
        self.module(&self.top_module).expect("top module is always present")
    }

    pub fn module(&self, name: &str) -> Option<&ModuleInfo> {
        self.modules.iter().find(|m| m.name == name)
    }

    /// Parser and analysis diagnostics for every module, in line order.
    pub fn all_diagnostics(&self) -> Vec<Diagnostic> {
        let mut all: Vec<Diagnostic> = self.diagnostics.clone();
        for m in &self.modules {
            all.extend(m.diagnostics.iter().cloned());
        }
        all.sort_by_key(|d| d.line);
        all
    }
}

/// Parses Verilog text and runs the structural analyses on every module.
///
/// `top_hint` selects the top module; without it the first module not
/// instantiated by another module of the file is used.
pub fn parse_design(source: &str, top_hint: Option<&str>, source_path: &str) -> Result<DesignModel, DesignError> {
    let (file, diagnostics) =
        parse_source(source).map_err(|err| DesignError::Syntax { path: source_path.into(), err })?;
    let mut modules: Vec<ModuleInfo> = Vec::new();
    for m in file.modules {
        if modules.iter().any(|x| x.name == m.name) {
            return Err(DesignError::DuplicateModule {
                path: source_path.into(),
                name: m.name.clone(),
                line: m.span.line,
            });
        }
        modules.push(build_module(m, source));
    }
    let top_module = match top_hint {
        Some(t) => {
            if !modules.iter().any(|m| m.name == t) {
                return Err(DesignError::TopModuleNotFound(t.into()));
            }
            t.to_string()
        }
        None => {
            let instantiated: BTreeSet<&str> =
                modules.iter().flat_map(|m| m.instances.iter().map(|i| i.module.as_str())).collect();
            modules
                .iter()
                .find(|m| !instantiated.contains(m.name.as_str()))
                .unwrap_or(&modules[0])
                .name
                .clone()
        }
    };
    let line_count = source.lines().count().max(1) as u32;
    Ok(DesignModel { source_path: source_path.into(), modules, top_module, diagnostics, line_count })
}

fn range_bounds(r: &Option<Range>, env: &ConstEnv) -> Result<Option<(i64, i64)>, ()> {
    let Some(r) = r else { return Ok(None) };
    let msb = eval_const(&r.msb, env).ok_or(())?;
    let lsb = eval_const(&r.lsb, env).ok_or(())?;
    Ok(Some((msb.value as i64, lsb.value as i64)))
}

fn bounds_width(b: Option<(i64, i64)>) -> u32 {
    match b {
        Some((m, l)) => ((m - l).unsigned_abs() + 1).min(u32::MAX as u64) as u32,
        None => 1,
    }
}

fn build_module(m: ast::Module, source: &str) -> ModuleInfo {
    let mut diags = Vec::new();
    let mut env = ConstEnv::new();
    let mut constants = Vec::new();

    let header = m.params.iter();
    let body = m.items.iter().flat_map(|i| match i {
        Item::Params(ps) => ps.as_slice(),
        _ => &[],
    });
    for p in header.chain(body) {
        let Some(mut v) = eval_const(&p.value, &env) else {
            diags.push(Diagnostic::warning(p.span.line, format!("cannot evaluate parameter '{}'", p.name)));
            continue;
        };
        match range_bounds(&p.range, &env) {
            Ok(Some(b)) => {
                v.width = bounds_width(Some(b)).min(128);
                v.value &= crate::bits::mask(v.width);
                v.sized = true;
            }
            Ok(None) => {}
            Err(()) => diags.push(Diagnostic::warning(p.span.line, format!("cannot evaluate range of '{}'", p.name))),
        }
        env.insert(p.name.clone(), v);
        constants.push(Constant { name: p.name.clone(), width: v.width, value: v.value, local: p.local });
    }

    let mut signals: Vec<SignalInfo> = Vec::new();
    let decl_signal = |decl_name: &str,
                           kind: SignalKind,
                           is_reg: bool,
                           range: &Option<Range>,
                           line: u32,
                           diags: &mut Vec<Diagnostic>,
                           signals: &mut Vec<SignalInfo>| {
        let bounds = match range_bounds(range, &env) {
            Ok(b) => b,
            Err(()) => {
                diags.push(Diagnostic::warning(line, format!("cannot evaluate range of '{decl_name}'")));
                None
            }
        };
        let width = if kind == SignalKind::Integer { 32 } else { bounds_width(bounds) };
        if let Some(existing) = signals.iter_mut().find(|s| s.name == decl_name) {
            // `output q; reg [3:0] q;` style redeclaration refines the port
            existing.is_reg |= is_reg;
            if range.is_some() {
                existing.bounds = bounds;
                existing.width = width;
            }
            return;
        }
        signals.push(SignalInfo {
            name: decl_name.into(),
            kind,
            is_reg,
            width,
            bounds,
            is_array: false,
            init: None,
            line,
        });
    };

    let mut port_order: Vec<String> = Vec::new();
    match &m.ports {
        PortList::Ansi(ports) => {
            for p in ports {
                port_order.push(p.name.clone());
                decl_signal(
                    &p.name,
                    SignalKind::Port(p.dir),
                    p.net == Some(NetKind::Reg),
                    &p.range,
                    p.span.line,
                    &mut diags,
                    &mut signals,
                );
            }
        }
        PortList::Names(names) => {
            port_order.extend(names.iter().cloned());
            // directions come from body declarations; reserve slots in port order
            for item in &m.items {
                if let Item::Ports(ps) = item {
                    for p in ps {
                        decl_signal(
                            &p.name,
                            SignalKind::Port(p.dir),
                            p.net == Some(NetKind::Reg),
                            &p.range,
                            p.span.line,
                            &mut diags,
                            &mut signals,
                        );
                    }
                }
            }
            signals.sort_by_key(|s| port_order.iter().position(|n| *n == s.name).unwrap_or(usize::MAX));
            for n in names {
                if !signals.iter().any(|s| s.name == *n) {
                    diags.push(Diagnostic::warning(m.span.line, format!("port '{n}' has no direction declaration")));
                }
            }
        }
    }

    let mut instances = Vec::new();
    for item in &m.items {
        match item {
            Item::Nets(n) => {
                for v in &n.vars {
                    let kind = match n.kind {
                        NetKind::Wire => SignalKind::Wire,
                        NetKind::Reg => SignalKind::Reg,
                        NetKind::Integer => SignalKind::Integer,
                    };
                    decl_signal(&v.name, kind, n.kind != NetKind::Wire, &n.range, n.span.line, &mut diags, &mut signals);
                    if let Some(s) = signals.iter_mut().find(|s| s.name == v.name) {
                        s.is_array = !v.dims.is_empty();
                        s.init = v.init.clone();
                    }
                }
            }
            Item::Instance(insts) => {
                for i in insts {
                    instances.push(InstanceInfo { module: i.module.clone(), name: i.name.clone(), line: i.span.line });
                }
            }
            Item::Initial(_, span) => diags.push(Diagnostic::note(
                span.line,
                "initial block ignored for reset analysis",
            )),
            _ => {}
        }
    }

    let ports: Vec<PortInfo> = signals
        .iter()
        .filter_map(|s| match s.kind {
            SignalKind::Port(direction) => Some(PortInfo {
                name: s.name.clone(),
                direction,
                width: s.width,
                bounds: s.bounds,
                signed: false,
            }),
            _ => None,
        })
        .collect();

    let source_text = source.get(m.extent.start..m.extent.end).unwrap_or_default().to_string();
    let mut info = ModuleInfo {
        name: m.name.clone(),
        ports,
        signals,
        clock: None,
        reset: None,
        registers: Vec::new(),
        constants,
        fsms: Vec::new(),
        instances,
        diagnostics: diags,
        source: source_text,
        line: m.span.line,
        ast: m,
    };

    let cr = detect_clock_reset(&info);
    info.clock = cr.clock;
    info.reset = cr.reset;
    info.diagnostics.extend(cr.diagnostics);

    let (regs, reg_diags) = registers(&info);
    info.registers = regs;
    info.diagnostics.extend(reg_diags);

    let (fsms, fsm_diags) = extract_fsms(&info);
    info.fsms = fsms;
    info.diagnostics.extend(fsm_diags);
    info
}

/// Names assigned (whole or partially) anywhere in a statement.
pub(crate) fn assigned_names<'a>(s: &'a ast::Stmt, out: &mut BTreeMap<&'a str, usize>) {
    match s {
        ast::Stmt::Block { stmts, .. } => stmts.iter().for_each(|s| assigned_names(s, out)),
        ast::Stmt::If { then, otherwise, .. } => {
            assigned_names(then, out);
            if let Some(o) = otherwise {
                assigned_names(o, out);
            }
        }
        ast::Stmt::Case { arms, .. } => arms.iter().for_each(|a| assigned_names(&a.body, out)),
        ast::Stmt::Assign { lhs, .. } => {
            let mut names = Vec::new();
            match lhs {
                Expr::Concat(items) => items.iter().for_each(|i| names.extend(i.target_name())),
                other => names.extend(other.target_name()),
            }
            for n in names {
                let len = out.len();
                out.entry(n).or_insert(len);
            }
        }
        ast::Stmt::Null | ast::Stmt::Unsupported { .. } => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_module_model() {
        let d = parse_design("module m(input clk); endmodule", None, "m.v").unwrap();
        assert_eq!(d.modules.len(), 1);
        let m = d.top();
        assert_eq!(m.name, "m");
        assert_eq!(m.ports.len(), 1);
        assert_eq!(m.ports[0].direction, Direction::Input);
        assert!(m.fsms.is_empty());
    }

    #[test]
    fn top_hint_must_exist() {
        let err = parse_design("module m; endmodule", Some("x"), "m.v").unwrap_err();
        assert_eq!(err, DesignError::TopModuleNotFound("x".into()));
    }

    #[test]
    fn duplicate_modules_rejected() {
        let err = parse_design("module m; endmodule\nmodule m; endmodule", None, "m.v").unwrap_err();
        assert!(matches!(err, DesignError::DuplicateModule { line: 2, .. }));
    }

    #[test]
    fn top_is_first_uninstantiated_module() {
        let src = "module leaf(input a); endmodule\nmodule top(input a); leaf u0 (.a(a)); endmodule";
        let d = parse_design(src, None, "t.v").unwrap();
        assert_eq!(d.top_module, "top");
        assert_eq!(d.top().instances[0].module, "leaf");
    }

    #[test]
    fn non_ansi_ports_and_widths() {
        let src = "module m(a, q);\n parameter W = 4;\n input a;\n output [W-1:0] q;\n reg [W-1:0] q;\nendmodule";
        let d = parse_design(src, None, "m.v").unwrap();
        let m = d.top();
        assert_eq!(m.ports.iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), ["a", "q"]);
        assert_eq!(m.port("q").unwrap().width, 4);
        assert!(m.signal("q").unwrap().is_reg);
        assert_eq!(m.constant("W").unwrap().value, 4);
    }

    #[test]
    fn constants_keep_declared_width() {
        let src = "module m; localparam [2:0] A = 5, B = 3'd2; localparam C = 7; endmodule";
        let m = parse_design(src, None, "m.v").unwrap().top().clone();
        assert_eq!(m.constant("A").map(|c| (c.width, c.value)), Some((3, 5)));
        assert_eq!(m.constant("B").map(|c| (c.width, c.value)), Some((3, 2)));
        assert_eq!(m.constant("C").map(|c| (c.width, c.value)), Some((32, 7)));
    }
}
