//! Recursive-descent parser for the Verilog subset.
//!
//! Constructs outside the subset inside a module body are consumed and kept
//! as `Unsupported` nodes with a skip diagnostic.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use crate::diag::Diagnostic;
use crate::lex::{self, LexError, TokKind, Token};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("{line}:{col}: expected {expected}, found '{found}'")]
    Parse { line: u32, col: u32, expected: String, found: String },
}

impl SyntaxError {
    pub fn line(&self) -> u32 {
        match self {
            SyntaxError::Lex(e) => e.line,
            SyntaxError::Parse { line, .. } => *line,
        }
    }
}

type PResult<T> = Result<T, SyntaxError>;

const EOF_TEXT: &str = "<eof>";

/// Parses a whole source file. Returns the tree plus skip diagnostics.
pub fn parse_source(src: &str) -> PResult<(SourceFile, Vec<Diagnostic>)> {
    let tokens = lex::tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, diags: Vec::new(), src_len: src.len() };
    let file = p.source_file()?;
    Ok((file, p.diags))
}

/// Parses a standalone expression (used for condition text and tests).
pub fn parse_expression(src: &str) -> PResult<Expr> {
    let tokens = lex::tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, diags: Vec::new(), src_len: src.len() };
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(p.error("end of expression"));
    }
    Ok(e)
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    diags: Vec<Diagnostic>,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token<'a>> {
        self.tokens.get(self.pos + n)
    }

    fn at_eof(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn check(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn check_at(&self, n: usize, text: &str) -> bool {
        self.peek_at(n).is_some_and(|t| t.is(text))
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.check(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn span(&self) -> Span {
        match self.peek().or_else(|| self.tokens.last()) {
            Some(t) => Span { line: t.line, col: t.col },
            None => Span { line: 1, col: 1 },
        }
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let (line, col, found) = match self.peek() {
            Some(t) => (t.line, t.col, t.text.to_string()),
            None => match self.tokens.last() {
                Some(t) => (t.line, t.col + t.text.len() as u32, EOF_TEXT.to_string()),
                None => (1, 1, EOF_TEXT.to_string()),
            },
        };
        SyntaxError::Parse { line, col, expected: expected.to_string(), found }
    }

    fn expect(&mut self, text: &str) -> PResult<()> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.error(&format!("'{text}'")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(t) if t.kind == TokKind::Ident && !is_keyword(t.text) => {
                let s = t.text.to_string();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("identifier")),
        }
    }

    /// Skips a compiler directive and the rest of its line.
    fn skip_directive(&mut self) {
        let line = self.tokens[self.pos].line;
        self.pos += 1;
        while self.peek().is_some_and(|t| t.line == line) {
            self.pos += 1;
        }
    }

    fn source_file(&mut self) -> PResult<SourceFile> {
        let mut modules = Vec::new();
        loop {
            while self.peek().is_some_and(|t| t.kind == TokKind::Directive) {
                self.skip_directive();
            }
            if self.at_eof() {
                break;
            }
            if self.check("module") || self.check("macromodule") {
                modules.push(self.module()?);
            } else {
                return Err(self.error("'module'"));
            }
        }
        if modules.is_empty() {
            return Err(self.error("'module'"));
        }
        Ok(SourceFile { modules })
    }

    fn module(&mut self) -> PResult<Module> {
        let span = self.span();
        let start = self.peek().map(|t| t.offset).unwrap_or(0);
        self.pos += 1;
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat("#") {
            self.expect("(")?;
            if !self.check(")") {
                loop {
                    let local = self.eat("localparam");
                    if !local {
                        self.eat("parameter");
                    }
                    params.push(self.param_decl(local)?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            self.expect(")")?;
        }
        let mut ports = PortList::Names(Vec::new());
        if self.eat("(") {
            if self.check("input") || self.check("output") || self.check("inout") {
                ports = PortList::Ansi(self.ansi_ports()?);
            } else {
                let mut names = Vec::new();
                if !self.check(")") {
                    loop {
                        names.push(self.ident()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                ports = PortList::Names(names);
            }
            self.expect(")")?;
        }
        self.expect(";")?;
        let mut items = Vec::new();
        while !self.check("endmodule") {
            if self.at_eof() {
                return Err(self.error("'endmodule'"));
            }
            if self.peek().is_some_and(|t| t.kind == TokKind::Directive) {
                self.skip_directive();
                continue;
            }
            items.push(self.item()?);
        }
        let end_tok = self.tokens[self.pos];
        self.pos += 1;
        let end = end_tok.end().min(self.src_len);
        Ok(Module {
            name,
            params,
            ports,
            items,
            span,
            extent: Extent { end_line: end_tok.line, start, end },
        })
    }

    fn ansi_ports(&mut self) -> PResult<Vec<PortDecl>> {
        let mut out: Vec<PortDecl> = Vec::new();
        loop {
            let span = self.span();
            let dir = if self.eat("input") {
                Some(Direction::Input)
            } else if self.eat("output") {
                Some(Direction::Output)
            } else if self.eat("inout") {
                Some(Direction::Inout)
            } else {
                None
            };
            let decl = match dir {
                Some(dir) => {
                    let net = self.net_kind();
                    let signed = self.eat("signed");
                    let range = self.opt_range()?;
                    let name = self.ident()?;
                    PortDecl { dir, net, signed, range, name, span }
                }
                None => {
                    let Some(prev) = out.last() else { return Err(self.error("port direction")) };
                    let mut d = prev.clone();
                    d.name = self.ident()?;
                    d.span = span;
                    d
                }
            };
            out.push(decl);
            if !self.eat(",") {
                break;
            }
        }
        Ok(out)
    }

    fn net_kind(&mut self) -> Option<NetKind> {
        if self.eat("wire") {
            Some(NetKind::Wire)
        } else if self.eat("reg") {
            Some(NetKind::Reg)
        } else if self.eat("integer") {
            Some(NetKind::Integer)
        } else {
            None
        }
    }

    fn opt_range(&mut self) -> PResult<Option<Range>> {
        if !self.eat("[") {
            return Ok(None);
        }
        let msb = self.expr()?;
        self.expect(":")?;
        let lsb = self.expr()?;
        self.expect("]")?;
        Ok(Some(Range { msb, lsb }))
    }

    fn param_decl(&mut self, local: bool) -> PResult<ParamDecl> {
        let span = self.span();
        self.eat("signed");
        self.eat("integer");
        let range = self.opt_range()?;
        let name = self.ident()?;
        self.expect("=")?;
        let value = self.expr()?;
        Ok(ParamDecl { local, range, name, value, span })
    }

    fn item(&mut self) -> PResult<Item> {
        let span = self.span();
        let tok = *self.peek().expect("item called at eof");
        match tok.text {
            "input" | "output" | "inout" if tok.kind == TokKind::Ident => {
                self.pos += 1;
                let dir = match tok.text {
                    "input" => Direction::Input,
                    "output" => Direction::Output,
                    _ => Direction::Inout,
                };
                let net = self.net_kind();
                let signed = self.eat("signed");
                let range = self.opt_range()?;
                let mut decls = Vec::new();
                loop {
                    let span = self.span();
                    let name = self.ident()?;
                    decls.push(PortDecl { dir, net, signed, range: range.clone(), name, span });
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(";")?;
                Ok(Item::Ports(decls))
            }
            "wire" | "reg" | "integer" if tok.kind == TokKind::Ident => {
                let kind = self.net_kind().expect("checked keyword");
                let signed = self.eat("signed");
                let range = self.opt_range()?;
                let mut vars = Vec::new();
                loop {
                    let name = self.ident()?;
                    let mut dims = Vec::new();
                    while let Some(r) = self.opt_range()? {
                        dims.push(r);
                    }
                    let init = if self.eat("=") { Some(self.expr()?) } else { None };
                    vars.push(NetVar { name, dims, init });
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(";")?;
                Ok(Item::Nets(NetDecl { kind, signed, range, vars, span }))
            }
            "parameter" | "localparam" if tok.kind == TokKind::Ident => {
                self.pos += 1;
                let local = tok.text == "localparam";
                let mut decls = Vec::new();
                loop {
                    decls.push(self.param_decl(local)?);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(";")?;
                Ok(Item::Params(decls))
            }
            "assign" if tok.kind == TokKind::Ident => {
                self.pos += 1;
                let mut pairs = Vec::new();
                loop {
                    let lhs = self.lvalue()?;
                    self.expect("=")?;
                    let rhs = self.expr()?;
                    pairs.push((lhs, rhs));
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(";")?;
                Ok(Item::Assign(pairs))
            }
            "always" if tok.kind == TokKind::Ident => {
                self.pos += 1;
                let sensitivity = if self.check("@") {
                    self.sensitivity()?
                } else {
                    return Ok(self.unsupported_item(self.pos - 1, span));
                };
                let body = self.stmt()?;
                Ok(Item::Always(AlwaysBlock { sensitivity, body, span }))
            }
            "initial" if tok.kind == TokKind::Ident => {
                self.pos += 1;
                let body = self.stmt()?;
                Ok(Item::Initial(body, span))
            }
            "generate" | "function" | "task" | "specify" if tok.kind == TokKind::Ident => {
                let start = self.pos;
                let end_kw = match tok.text {
                    "generate" => "endgenerate",
                    "function" => "endfunction",
                    "task" => "endtask",
                    _ => "endspecify",
                };
                while !self.check(end_kw) {
                    if self.at_eof() {
                        return Err(self.error(&format!("'{end_kw}'")));
                    }
                    self.pos += 1;
                }
                self.pos += 1;
                Ok(self.record_unsupported_item(start, span))
            }
            _ if tok.kind == TokKind::Ident
                && !is_keyword(tok.text)
                && (self.check_at(1, "#")
                    || self.peek_at(1).is_some_and(|t| t.kind == TokKind::Ident)) =>
            {
                self.instances().map(Item::Instance)
            }
            _ => Ok(self.unsupported_item(self.pos, span)),
        }
    }

    fn instances(&mut self) -> PResult<Vec<Instance>> {
        let module = self.ident()?;
        let mut params = Vec::new();
        if self.eat("#") {
            self.expect("(")?;
            params = self.connections()?;
            self.expect(")")?;
        }
        let mut out = Vec::new();
        loop {
            let span = self.span();
            let name = self.ident()?;
            self.expect("(")?;
            let connections = self.connections()?;
            self.expect(")")?;
            out.push(Instance { module: module.clone(), params: params.clone(), name, connections, span });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")?;
        Ok(out)
    }

    fn connections(&mut self) -> PResult<Vec<Connection>> {
        let mut out = Vec::new();
        if self.check(")") {
            return Ok(out);
        }
        loop {
            if self.eat(".") {
                let port = self.ident()?;
                self.expect("(")?;
                let expr = if self.check(")") { None } else { Some(self.expr()?) };
                self.expect(")")?;
                out.push(Connection { port: Some(port), expr });
            } else {
                out.push(Connection { port: None, expr: Some(self.expr()?) });
            }
            if !self.eat(",") {
                break;
            }
        }
        Ok(out)
    }

    /// Skips to the next `;` at bracket depth 0 and records the construct.
    fn unsupported_item(&mut self, start: usize, span: Span) -> Item {
        self.pos = start;
        self.skip_to_semicolon();
        self.record_unsupported_item(start, span)
    }

    fn skip_to_semicolon(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.peek() {
            if t.kind == TokKind::Punct {
                match t.text {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => depth -= 1,
                    ";" if depth <= 0 => {
                        self.pos += 1;
                        return;
                    }
                    _ => {}
                }
            }
            if depth <= 0 && t.is("endmodule") {
                return;
            }
            self.pos += 1;
        }
    }

    fn joined(&self, start: usize) -> String {
        let mut text = String::new();
        for (i, t) in self.tokens[start..self.pos].iter().enumerate() {
            if i > 0 {
                text.push(' ');
            }
            text.push_str(t.text);
        }
        text
    }

    fn record_unsupported_item(&mut self, start: usize, span: Span) -> Item {
        let text = self.joined(start);
        let first = self.tokens[start].text;
        self.diags.push(Diagnostic::warning(
            span.line,
            format!("skipped unsupported construct starting with '{first}'"),
        ));
        Item::Unsupported { text, span }
    }

    fn sensitivity(&mut self) -> PResult<Sensitivity> {
        self.expect("@")?;
        if self.eat("*") {
            return Ok(Sensitivity::Star);
        }
        if !self.eat("(") {
            let name = self.ident()?;
            return Ok(Sensitivity::List(alloc::vec![Event { edge: None, signal: Expr::Ident(name) }]));
        }
        if self.eat("*") {
            self.expect(")")?;
            return Ok(Sensitivity::Star);
        }
        let mut events = Vec::new();
        loop {
            let edge = if self.eat("posedge") {
                Some(Edge::Posedge)
            } else if self.eat("negedge") {
                Some(Edge::Negedge)
            } else {
                None
            };
            let signal = self.expr()?;
            events.push(Event { edge, signal });
            if !(self.eat("or") || self.eat(",")) {
                break;
            }
        }
        self.expect(")")?;
        Ok(Sensitivity::List(events))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let Some(tok) = self.peek().copied() else { return Err(self.error("statement")) };
        if tok.kind == TokKind::Ident {
            match tok.text {
                "begin" => {
                    self.pos += 1;
                    let label = if self.eat(":") { Some(self.ident()?) } else { None };
                    let mut stmts = Vec::new();
                    while !self.eat("end") {
                        if self.at_eof() {
                            return Err(self.error("'end'"));
                        }
                        stmts.push(self.stmt()?);
                    }
                    return Ok(Stmt::Block { label, stmts });
                }
                "if" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let then = Box::new(self.stmt()?);
                    let otherwise = if self.eat("else") { Some(Box::new(self.stmt()?)) } else { None };
                    return Ok(Stmt::If { cond, then, otherwise });
                }
                "case" | "casez" | "casex" => {
                    self.pos += 1;
                    let kind = match tok.text {
                        "case" => CaseKind::Case,
                        "casez" => CaseKind::Casez,
                        _ => CaseKind::Casex,
                    };
                    self.expect("(")?;
                    let expr = self.expr()?;
                    self.expect(")")?;
                    let mut arms = Vec::new();
                    while !self.eat("endcase") {
                        if self.at_eof() {
                            return Err(self.error("'endcase'"));
                        }
                        let labels = if self.eat("default") {
                            self.eat(":");
                            Vec::new()
                        } else {
                            let mut labels = Vec::new();
                            loop {
                                labels.push(self.expr()?);
                                if !self.eat(",") {
                                    break;
                                }
                            }
                            self.expect(":")?;
                            labels
                        };
                        let body = self.stmt()?;
                        arms.push(CaseArm { labels, body });
                    }
                    return Ok(Stmt::Case { kind, expr, arms });
                }
                "for" | "while" | "repeat" => {
                    let start = self.pos;
                    self.pos += 1;
                    self.expect("(")?;
                    self.skip_balanced_parens()?;
                    self.stmt()?;
                    return Ok(self.unsupported_stmt(start, span));
                }
                "forever" => {
                    let start = self.pos;
                    self.pos += 1;
                    self.stmt()?;
                    return Ok(self.unsupported_stmt(start, span));
                }
                _ => {}
            }
        }
        if self.eat(";") {
            return Ok(Stmt::Null);
        }
        if tok.kind == TokKind::SysIdent || tok.is("#") || tok.kind == TokKind::Directive {
            let start = self.pos;
            self.skip_to_semicolon();
            return Ok(self.unsupported_stmt(start, span));
        }
        let lhs = self.lvalue()?;
        let nonblocking = if self.eat("<=") {
            true
        } else if self.eat("=") {
            false
        } else {
            return Err(self.error("'=' or '<='"));
        };
        let rhs = self.expr()?;
        self.expect(";")?;
        Ok(Stmt::Assign { lhs, rhs, nonblocking, span })
    }

    /// Consumes tokens up to the `)` closing an already-consumed `(`.
    fn skip_balanced_parens(&mut self) -> PResult<()> {
        let mut depth = 1;
        while depth > 0 {
            let Some(t) = self.peek() else { return Err(self.error("')'")) };
            if t.is("(") {
                depth += 1;
            } else if t.is(")") {
                depth -= 1;
            }
            self.pos += 1;
        }
        Ok(())
    }

    fn unsupported_stmt(&mut self, start: usize, span: Span) -> Stmt {
        let text = self.joined(start);
        let first = self.tokens[start].text;
        self.diags.push(Diagnostic::warning(
            span.line,
            format!("skipped unsupported statement starting with '{first}'"),
        ));
        Stmt::Unsupported { text, span }
    }

    fn lvalue(&mut self) -> PResult<Expr> {
        if self.check("{") {
            return self.concat();
        }
        let name = self.hier_ident()?;
        self.selects(Expr::Ident(name))
    }

    fn hier_ident(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.check(".") && self.peek_at(1).is_some_and(|t| t.kind == TokKind::Ident) {
            self.pos += 1;
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    fn selects(&mut self, mut base: Expr) -> PResult<Expr> {
        while self.eat("[") {
            let first = self.expr()?;
            if self.eat(":") {
                let lsb = self.expr()?;
                self.expect("]")?;
                base = Expr::Slice(Box::new(base), Box::new(first), Box::new(lsb));
            } else if self.check("+:") || self.check("-:") {
                let up = self.check("+:");
                self.pos += 1;
                let width = self.expr()?;
                self.expect("]")?;
                base = Expr::PartSelect { base: Box::new(base), start: Box::new(first), up, width: Box::new(width) };
            } else {
                self.expect("]")?;
                base = Expr::Index(Box::new(base), Box::new(first));
            }
        }
        Ok(base)
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat("?") {
            let a = self.expr()?;
            self.expect(":")?;
            let b = self.expr()?;
            return Ok(Expr::Ternary(Box::new(cond), Box::new(a), Box::new(b)));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) =
            self.peek().filter(|t| t.kind == TokKind::Punct).and_then(|t| BinaryOp::from_symbol(t.text))
        {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if let Some(op) =
            self.peek().filter(|t| t.kind == TokKind::Punct).and_then(|t| UnaryOp::from_symbol(t.text))
        {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(Expr::Unary(op, Box::new(e)));
        }
        self.primary()
    }

    fn concat(&mut self) -> PResult<Expr> {
        self.expect("{")?;
        let first = self.expr()?;
        if self.check("{") {
            self.pos += 1;
            let mut inner = Vec::new();
            loop {
                inner.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("}")?;
            self.expect("}")?;
            return Ok(Expr::Replicate(Box::new(first), inner));
        }
        let mut items = alloc::vec![first];
        while self.eat(",") {
            items.push(self.expr()?);
        }
        self.expect("}")?;
        Ok(Expr::Concat(items))
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.check(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek().copied() else { return Err(self.error("expression")) };
        let e = match tok.kind {
            TokKind::Number => {
                self.pos += 1;
                Expr::Number(Number::parse(tok.text))
            }
            TokKind::Str => {
                self.pos += 1;
                Expr::Str(tok.text.to_string())
            }
            TokKind::SysIdent => {
                self.pos += 1;
                let args = if self.check("(") { self.call_args()? } else { Vec::new() };
                Expr::Call(tok.text.to_string(), args)
            }
            TokKind::Directive => {
                self.pos += 1;
                Expr::Ident(tok.text.to_string())
            }
            TokKind::Ident if !is_keyword(tok.text) => {
                let name = self.hier_ident()?;
                if self.check("(") {
                    Expr::Call(name, self.call_args()?)
                } else {
                    Expr::Ident(name)
                }
            }
            TokKind::Punct if tok.text == "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                e
            }
            TokKind::Punct if tok.text == "{" => self.concat()?,
            _ => return Err(self.error("expression")),
        };
        self.selects(e)
    }
}

pub fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "module"
            | "macromodule"
            | "endmodule"
            | "input"
            | "output"
            | "inout"
            | "wire"
            | "reg"
            | "integer"
            | "parameter"
            | "localparam"
            | "assign"
            | "always"
            | "initial"
            | "begin"
            | "end"
            | "if"
            | "else"
            | "case"
            | "casez"
            | "casex"
            | "endcase"
            | "default"
            | "posedge"
            | "negedge"
            | "or"
            | "signed"
            | "for"
            | "while"
            | "repeat"
            | "forever"
            | "generate"
            | "endgenerate"
            | "function"
            | "endfunction"
            | "task"
            | "endtask"
            | "genvar"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_expects_module() {
        let err = parse_source("").unwrap_err();
        assert_eq!(
            err,
            SyntaxError::Parse { line: 1, col: 1, expected: "'module'".into(), found: "<eof>".into() }
        );
        assert!(err.to_string().contains("expected 'module'"));
    }

    #[test]
    fn minimal_module() {
        let (file, diags) = parse_source("module m(input clk);\nendmodule\n").unwrap();
        assert!(diags.is_empty());
        assert_eq!(file.modules.len(), 1);
        let PortList::Ansi(ports) = &file.modules[0].ports else { panic!() };
        assert_eq!(ports[0].name, "clk");
        assert_eq!(ports[0].dir, Direction::Input);
    }

    #[test]
    fn error_carries_position_and_token() {
        let err = parse_source("module m;\n  assign = 1;\nendmodule").unwrap_err();
        match err {
            SyntaxError::Parse { line, col, found, .. } => {
                assert_eq!((line, col), (2, 10));
                assert_eq!(found, "=");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        let e = parse_expression("a || b && c == 2'b01").unwrap();
        let Expr::Binary(BinaryOp::LogOr, _, rhs) = e else { panic!() };
        let Expr::Binary(BinaryOp::LogAnd, _, eq) = *rhs else { panic!() };
        assert!(matches!(*eq, Expr::Binary(BinaryOp::Eq, _, _)));
    }

    #[test]
    fn skips_generate_with_diagnostic() {
        let src = "module m;\ngenvar i;\ngenerate for (i=0;i<2;i=i+1) begin end endgenerate\nendmodule";
        let (file, diags) = parse_source(src).unwrap();
        assert_eq!(file.modules[0].items.len(), 2);
        assert_eq!(diags.len(), 2);
        assert_eq!(diags[1].line, 3);
    }

    #[test]
    fn nonblocking_vs_less_equal() {
        let (file, _) =
            parse_source("module m(input clk); reg a; always @(posedge clk) a <= a <= 1; endmodule").unwrap();
        let Item::Always(b) = &file.modules[0].items[1] else { panic!() };
        let Stmt::Assign { nonblocking, rhs, .. } = &b.body else { panic!() };
        assert!(*nonblocking);
        assert!(matches!(rhs, Expr::Binary(BinaryOp::Le, _, _)));
    }
}
