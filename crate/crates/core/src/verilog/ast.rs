//! Syntax tree for the supported Verilog subset.
//!
//! Source positions are carried in [`Span`], which compares equal to every
//! other span so that trees parsed from differently formatted text compare
//! structurally.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub modules: Vec<Module>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    /// `#(parameter ...)` header parameters.
    pub params: Vec<ParamDecl>,
    pub ports: PortList,
    pub items: Vec<Item>,
    pub span: Span,
    pub extent: Extent,
}

/// Where a module sits in its source file. Like [`Span`], always equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Extent {
    pub end_line: u32,
    /// Byte range of `module ... endmodule`.
    pub start: usize,
    pub end: usize,
}

impl PartialEq for Extent {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Extent {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PortList {
    /// `(input a, output [1:0] b)`
    Ansi(Vec<PortDecl>),
    /// `(a, b)` with directions declared in the body. Also used for `()` and
    /// for a missing list.
    Names(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Input,
    Output,
    Inout,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
            Direction::Inout => "inout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    Wire,
    Reg,
    Integer,
}

impl NetKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NetKind::Wire => "wire",
            NetKind::Reg => "reg",
            NetKind::Integer => "integer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Range {
    pub msb: Expr,
    pub lsb: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub dir: Direction,
    pub net: Option<NetKind>,
    pub signed: bool,
    pub range: Option<Range>,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDecl {
    pub kind: NetKind,
    pub signed: bool,
    pub range: Option<Range>,
    pub vars: Vec<NetVar>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetVar {
    pub name: String,
    /// Unpacked dimensions (memories).
    pub dims: Vec<Range>,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub local: bool,
    pub range: Option<Range>,
    pub name: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    /// `None` for positional connections.
    pub port: Option<String>,
    pub expr: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub module: String,
    pub params: Vec<Connection>,
    pub name: String,
    pub connections: Vec<Connection>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Posedge,
    Negedge,
}

impl Edge {
    pub fn keyword(self) -> &'static str {
        match self {
            Edge::Posedge => "posedge",
            Edge::Negedge => "negedge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub edge: Option<Edge>,
    pub signal: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sensitivity {
    /// `@*` / `@(*)`
    Star,
    List(Vec<Event>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlwaysBlock {
    pub sensitivity: Sensitivity,
    pub body: Stmt,
    pub span: Span,
}

impl AlwaysBlock {
    /// Edge-triggered events, when every event in the list has an edge.
    pub fn edges(&self) -> Option<Vec<(Edge, &str)>> {
        let Sensitivity::List(events) = &self.sensitivity else { return None };
        if events.is_empty() {
            return None;
        }
        events
            .iter()
            .map(|e| match (&e.edge, &e.signal) {
                (Some(edge), Expr::Ident(name)) => Some((*edge, name.as_str())),
                _ => None,
            })
            .collect()
    }

    pub fn is_sequential(&self) -> bool {
        self.edges().is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Ports(Vec<PortDecl>),
    Nets(NetDecl),
    Params(Vec<ParamDecl>),
    Assign(Vec<(Expr, Expr)>),
    Always(AlwaysBlock),
    Initial(Stmt, Span),
    Instance(Vec<Instance>),
    /// Tokens of a construct outside the subset, space-joined.
    Unsupported { text: String, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Case,
    Casez,
    Casex,
}

impl CaseKind {
    pub fn keyword(self) -> &'static str {
        match self {
            CaseKind::Case => "case",
            CaseKind::Casez => "casez",
            CaseKind::Casex => "casex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseArm {
    /// Empty for `default`.
    pub labels: Vec<Expr>,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Block { label: Option<String>, stmts: Vec<Stmt> },
    If { cond: Expr, then: Box<Stmt>, otherwise: Option<Box<Stmt>> },
    Case { kind: CaseKind, expr: Expr, arms: Vec<CaseArm> },
    Assign { lhs: Expr, rhs: Expr, nonblocking: bool, span: Span },
    Null,
    Unsupported { text: String, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    BitNot,
    Neg,
    Plus,
    RedAnd,
    RedOr,
    RedXor,
    RedNand,
    RedNor,
    RedXnor,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
            UnaryOp::RedAnd => "&",
            UnaryOp::RedOr => "|",
            UnaryOp::RedXor => "^",
            UnaryOp::RedNand => "~&",
            UnaryOp::RedNor => "~|",
            UnaryOp::RedXnor => "~^",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "!" => UnaryOp::Not,
            "~" => UnaryOp::BitNot,
            "-" => UnaryOp::Neg,
            "+" => UnaryOp::Plus,
            "&" => UnaryOp::RedAnd,
            "|" => UnaryOp::RedOr,
            "^" => UnaryOp::RedXor,
            "~&" => UnaryOp::RedNand,
            "~|" => UnaryOp::RedNor,
            "~^" | "^~" => UnaryOp::RedXnor,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Pow,
    Mul,
    Div,
    Mod,
    Add,
    Sub,
    Shl,
    Shr,
    AShl,
    AShr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    CaseEq,
    CaseNe,
    BitAnd,
    BitNand,
    BitXor,
    BitXnor,
    BitOr,
    BitNor,
    LogAnd,
    LogOr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Pow => "**",
            Mul => "*",
            Div => "/",
            Mod => "%",
            Add => "+",
            Sub => "-",
            Shl => "<<",
            Shr => ">>",
            AShl => "<<<",
            AShr => ">>>",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            CaseEq => "===",
            CaseNe => "!==",
            BitAnd => "&",
            BitNand => "~&",
            BitXor => "^",
            BitXnor => "~^",
            BitOr => "|",
            BitNor => "~|",
            LogAnd => "&&",
            LogOr => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        use BinaryOp::*;
        match self {
            Pow => 12,
            Mul | Div | Mod => 11,
            Add | Sub => 10,
            Shl | Shr | AShl | AShr => 9,
            Lt | Le | Gt | Ge => 8,
            Eq | Ne | CaseEq | CaseNe => 7,
            BitAnd | BitNand => 6,
            BitXor | BitXnor => 5,
            BitOr | BitNor => 4,
            LogAnd => 3,
            LogOr => 2,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        use BinaryOp::*;
        Some(match s {
            "**" => Pow,
            "*" => Mul,
            "/" => Div,
            "%" => Mod,
            "+" => Add,
            "-" => Sub,
            "<<" => Shl,
            ">>" => Shr,
            "<<<" => AShl,
            ">>>" => AShr,
            "<" => Lt,
            "<=" => Le,
            ">" => Gt,
            ">=" => Ge,
            "==" => Eq,
            "!=" => Ne,
            "===" => CaseEq,
            "!==" => CaseNe,
            "&" => BitAnd,
            "~&" => BitNand,
            "^" => BitXor,
            "~^" | "^~" => BitXnor,
            "|" => BitOr,
            "~|" => BitNor,
            "&&" => LogAnd,
            "||" => LogOr,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Possibly hierarchical (`a.b.c`).
    Ident(String),
    Number(Number),
    Str(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Slice(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `base[start +: width]` (`up`) or `base[start -: width]`.
    PartSelect { base: Box<Expr>, start: Box<Expr>, up: bool, width: Box<Expr> },
    Concat(Vec<Expr>),
    Replicate(Box<Expr>, Vec<Expr>),
    Call(String, Vec<Expr>),
}

/// A literal as written plus its decoded size and value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Number {
    pub text: String,
    /// `None` for unsized literals.
    pub width: Option<u32>,
    /// `None` when any digit is x/z/? or the value exceeds 128 bits.
    pub value: Option<u128>,
}

impl Number {
    pub fn parse(text: &str) -> Self {
        let mut width = None;
        let mut value = None;
        let clean = |s: &str| -> String { s.chars().filter(|c| *c != '_').collect() };
        if let Some((w, rest)) = text.split_once('\'') {
            if !w.is_empty() {
                width = clean(w).parse::<u32>().ok();
            }
            let rest = rest.trim_start_matches(['s', 'S']);
            let mut chars = rest.chars();
            let radix = match chars.next().map(|c| c.to_ascii_lowercase()) {
                Some('b') => Some(2),
                Some('o') => Some(8),
                Some('d') => Some(10),
                Some('h') => Some(16),
                _ => None,
            };
            match radix {
                Some(radix) => value = u128::from_str_radix(&clean(chars.as_str()), radix).ok(),
                // '0 / '1 fill literals
                None => {
                    value = match rest {
                        "0" => Some(0),
                        "1" => Some(u128::MAX),
                        _ => None,
                    }
                }
            }
        } else if !text.contains('.') {
            value = clean(text).parse::<u128>().ok();
        }
        if let (Some(w), Some(v)) = (width, value) {
            if w < 128 {
                value = Some(v & ((1u128 << w) - 1));
            }
        }
        Number { text: text.into(), width, value }
    }
}

impl Expr {
    pub fn ident(name: &str) -> Self {
        Expr::Ident(name.into())
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Expr::Ident(s) => Some(s),
            _ => None,
        }
    }

    /// Base identifier of an lvalue (`a`, `a[3]`, `a[3:0]`).
    pub fn target_name(&self) -> Option<&str> {
        match self {
            Expr::Ident(s) => Some(s),
            Expr::Index(b, _) | Expr::Slice(b, _, _) => b.target_name(),
            Expr::PartSelect { base, .. } => base.target_name(),
            _ => None,
        }
    }

    /// Copy with every identifier replaced by `f(name)`.
    pub fn map_idents(&self, f: &dyn Fn(&str) -> Expr) -> Expr {
        let m = |e: &Expr| Box::new(e.map_idents(f));
        match self {
            Expr::Ident(s) => f(s),
            Expr::Number(_) | Expr::Str(_) => self.clone(),
            Expr::Unary(op, e) => Expr::Unary(*op, m(e)),
            Expr::Binary(op, a, b) => Expr::Binary(*op, m(a), m(b)),
            Expr::Ternary(a, b, c) => Expr::Ternary(m(a), m(b), m(c)),
            Expr::Index(a, b) => Expr::Index(m(a), m(b)),
            Expr::Slice(a, b, c) => Expr::Slice(m(a), m(b), m(c)),
            Expr::PartSelect { base, start, up, width } => {
                Expr::PartSelect { base: m(base), start: m(start), up: *up, width: m(width) }
            }
            Expr::Concat(es) => Expr::Concat(es.iter().map(|e| e.map_idents(f)).collect()),
            Expr::Call(n, es) => Expr::Call(n.clone(), es.iter().map(|e| e.map_idents(f)).collect()),
            Expr::Replicate(n, es) => Expr::Replicate(m(n), es.iter().map(|e| e.map_idents(f)).collect()),
        }
    }

    /// Every identifier referenced, in left-to-right order, duplicates kept.
    pub fn idents<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Ident(s) => out.push(s),
            Expr::Number(_) | Expr::Str(_) => {}
            Expr::Unary(_, e) => e.idents(out),
            Expr::Binary(_, a, b) | Expr::Index(a, b) => {
                a.idents(out);
                b.idents(out);
            }
            Expr::Ternary(a, b, c) | Expr::Slice(a, b, c) => {
                a.idents(out);
                b.idents(out);
                c.idents(out);
            }
            Expr::PartSelect { base, start, width, .. } => {
                base.idents(out);
                start.idents(out);
                width.idents(out);
            }
            Expr::Concat(es) | Expr::Call(_, es) => es.iter().for_each(|e| e.idents(out)),
            Expr::Replicate(n, es) => {
                n.idents(out);
                es.iter().for_each(|e| e.idents(out));
            }
        }
    }
}
