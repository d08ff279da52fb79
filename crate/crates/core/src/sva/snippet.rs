//! The single-property assertion snippet:
//!
//! ```text
//! property <name>;
//!   @(<edge> <signal>) [disable iff (<expr>)] <left> <op> <right>;
//! endproperty
//! <label>: assert property(<name>);
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lex::{self, TokKind, Token};
use crate::verilog::ast::{BinaryOp, Expr};
use crate::verilog::parser::parse_expression;
use crate::verilog::print::expr_to_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SenseEdge {
    Posedge,
    Negedge,
}

impl SenseEdge {
    pub fn keyword(self) -> &'static str {
        match self {
            SenseEdge::Posedge => "posedge",
            SenseEdge::Negedge => "negedge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SvaOperator {
    /// `|->`
    Overlapped,
    /// `|=>`
    NonOverlapped,
    Eq,
    Ne,
    /// No split; the whole body is `left_part`.
    Boolean,
}

impl SvaOperator {
    pub fn symbol(self) -> Option<&'static str> {
        match self {
            SvaOperator::Overlapped => Some("|->"),
            SvaOperator::NonOverlapped => Some("|=>"),
            SvaOperator::Eq => Some("=="),
            SvaOperator::Ne => Some("!="),
            SvaOperator::Boolean => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SvaSnippet {
    pub property_name: String,
    pub sense_edge: SenseEdge,
    pub sense_signal: String,
    /// Expression of `disable iff (...)`, when present.
    pub disable_iff: Option<String>,
    pub left_part: String,
    pub operator: SvaOperator,
    /// `None` exactly when the operator is `Boolean`.
    pub right_part: Option<String>,
    pub assert_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: expected {expected}")]
pub struct SnippetSyntaxError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
}

impl SvaSnippet {
    /// Body expression: `left op right`, or `left` alone.
    pub fn body(&self) -> String {
        match (&self.operator.symbol(), &self.right_part) {
            (Some(op), Some(r)) => format!("{} {op} {r}", self.left_part),
            _ => self.left_part.clone(),
        }
    }

    /// Canonical text, four lines, no trailing newline.
    pub fn serialize(&self) -> String {
        let disable = match &self.disable_iff {
            Some(d) => format!(" disable iff ({d})"),
            None => String::new(),
        };
        format!(
            "property {name};\n  @({edge} {sig}){disable} {body};\nendproperty\n{label}: assert property({name});",
            name = self.property_name,
            edge = self.sense_edge.keyword(),
            sig = self.sense_signal,
            body = self.body(),
            label = self.assert_label,
        )
    }

    /// Every expression part, parsed.
    pub fn expressions(&self) -> Vec<Expr> {
        let mut parts: Vec<&str> = alloc::vec![self.sense_signal.as_str()];
        parts.extend(self.disable_iff.as_deref());
        parts.push(&self.left_part);
        parts.extend(self.right_part.as_deref());
        parts.iter().filter_map(|p| parse_expression(p).ok()).collect()
    }
}

impl fmt::Display for SvaSnippet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Operand text for one side of `==`/`!=`: parenthesized when it would
/// otherwise re-associate.
fn side_text(e: &Expr) -> String {
    match e {
        Expr::Binary(op, ..) if op.precedence() <= BinaryOp::Eq.precedence() => format!("({})", expr_to_string(e)),
        Expr::Ternary(..) => format!("({})", expr_to_string(e)),
        _ => expr_to_string(e),
    }
}

struct P<'a> {
    src: &'a str,
    toks: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> P<'a> {
    fn err_at(&self, idx: usize, expected: &str) -> SnippetSyntaxError {
        let (line, col) = match self.toks.get(idx) {
            Some(t) => (t.line, t.col),
            None => end_position(self.src),
        };
        SnippetSyntaxError { line, col, expected: expected.into() }
    }

    fn err(&self, expected: &str) -> SnippetSyntaxError {
        self.err_at(self.pos, expected)
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.toks.get(self.pos)
    }

    fn expect(&mut self, text: &str) -> Result<(), SnippetSyntaxError> {
        match self.peek() {
            Some(t) if t.is(text) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(&format!("'{text}'"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'a str, SnippetSyntaxError> {
        match self.peek().copied() {
            Some(t) if t.kind == TokKind::Ident && !is_reserved(t.text) => {
                self.pos += 1;
                Ok(t.text)
            }
            _ => Err(self.err(what)),
        }
    }

    fn hier_ident(&mut self) -> Result<String, SnippetSyntaxError> {
        let mut name = self.ident("signal name")?.to_string();
        while self.peek().is_some_and(|t| t.is(".")) {
            self.pos += 1;
            name.push('.');
            name.push_str(self.ident("signal name")?);
        }
        Ok(name)
    }

    /// Index one past the token closing the bracket opened at `open`.
    fn matching(&self, open: usize) -> Result<usize, SnippetSyntaxError> {
        let mut depth = 0usize;
        for i in open..self.toks.len() {
            let t = &self.toks[i];
            if t.kind != TokKind::Punct {
                continue;
            }
            match t.text {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return Ok(i + 1);
                    }
                }
                _ => {}
            }
        }
        Err(self.err_at(self.toks.len(), "')'"))
    }

    fn slice(&self, from: usize, to: usize) -> &'a str {
        if from >= to {
            return "";
        }
        &self.src[self.toks[from].offset..self.toks[to - 1].end()]
    }

    fn expr(&self, from: usize, to: usize, what: &str) -> Result<Expr, SnippetSyntaxError> {
        if from >= to {
            return Err(self.err_at(from, what));
        }
        parse_expression(self.slice(from, to)).map_err(|_| self.err_at(from, what))
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "property" | "endproperty" | "assert" | "disable" | "iff" | "posedge" | "negedge"
    )
}

fn end_position(src: &str) -> (u32, u32) {
    let line = src.matches('\n').count() as u32 + 1;
    let col = src.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
    (line, col)
}

/// Parses exactly one snippet (comments and surrounding whitespace allowed).
pub fn parse_snippet(text: &str) -> Result<SvaSnippet, SnippetSyntaxError> {
    let toks = lex::tokenize(text).map_err(|e| SnippetSyntaxError {
        line: e.line,
        col: e.col,
        expected: format!("valid token ({})", e.message),
    })?;
    let mut p = P { src: text, toks, pos: 0 };
    p.expect("property")?;
    let name = p.ident("property name")?.to_string();
    p.expect(";")?;
    p.expect("@")?;
    p.expect("(")?;
    let sense_edge = match p.peek() {
        Some(t) if t.is("posedge") => SenseEdge::Posedge,
        Some(t) if t.is("negedge") => SenseEdge::Negedge,
        _ => return Err(p.err("'posedge' or 'negedge'")),
    };
    p.pos += 1;
    let sense_signal = p.hier_ident()?;
    p.expect(")")?;

    let mut disable_iff = None;
    if p.peek().is_some_and(|t| t.is("disable")) {
        p.pos += 1;
        p.expect("iff")?;
        if !p.peek().is_some_and(|t| t.is("(")) {
            return Err(p.err("'('"));
        }
        let close = p.matching(p.pos)?;
        let e = p.expr(p.pos + 1, close - 1, "disable condition")?;
        disable_iff = Some(expr_to_string(&e));
        p.pos = close;
    }

    // body: up to the `;` at bracket depth 0
    let start = p.pos;
    let mut depth = 0i32;
    let mut end = None;
    let mut implications = Vec::new();
    for i in start..p.toks.len() {
        let t = &p.toks[i];
        if t.kind != TokKind::Punct {
            if t.is("endproperty") {
                break;
            }
            continue;
        }
        match t.text {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            "##" => return Err(p.err_at(i, "expression (sequence delays are not supported)")),
            "*" if i > 0 && p.toks[i - 1].is("[") => {
                return Err(p.err_at(i, "expression (repetition is not supported)"))
            }
            "|->" | "|=>" if depth == 0 => implications.push(i),
            ";" if depth == 0 => {
                end = Some(i);
                break;
            }
            _ => {}
        }
    }
    let Some(end) = end else {
        return Err(p.err_at(start, "';' after property body"));
    };
    if implications.len() > 1 {
        return Err(p.err_at(implications[1], "at most one implication"));
    }
    let (left_part, operator, right_part) = match implications.first() {
        Some(&i) => {
            let op = if p.toks[i].text == "|->" { SvaOperator::Overlapped } else { SvaOperator::NonOverlapped };
            let l = p.expr(start, i, "antecedent expression")?;
            let r = p.expr(i + 1, end, "consequent expression")?;
            (expr_to_string(&l), op, Some(expr_to_string(&r)))
        }
        None => {
            let body = p.expr(start, end, "property expression")?;
            match body {
                Expr::Binary(op @ (BinaryOp::Eq | BinaryOp::Ne), l, r) => {
                    let op = if op == BinaryOp::Eq { SvaOperator::Eq } else { SvaOperator::Ne };
                    (side_text(&l), op, Some(side_text(&r)))
                }
                other => (expr_to_string(&other), SvaOperator::Boolean, None),
            }
        }
    };
    p.pos = end + 1;
    p.expect("endproperty")?;
    let label = p.ident("assertion label")?.to_string();
    p.expect(":")?;
    p.expect("assert")?;
    p.expect("property")?;
    p.expect("(")?;
    let referenced = p.ident("property name")?;
    if referenced != name {
        return Err(p.err_at(p.pos - 1, &format!("property name '{name}'")));
    }
    p.expect(")")?;
    p.expect(";")?;
    if p.pos < p.toks.len() {
        return Err(p.err("end of snippet"));
    }
    Ok(SvaSnippet {
        property_name: name,
        sense_edge,
        sense_signal,
        disable_iff,
        left_part,
        operator,
        right_part,
        assert_label: label,
    })
}

/// Builds a snippet from parts, canonicalizing the expression text so the
/// result round-trips through [`parse_snippet`].
pub fn build_snippet(
    name: &str,
    edge: SenseEdge,
    signal: &str,
    disable_iff: Option<&str>,
    body: &str,
    label: &str,
) -> Result<SvaSnippet, SnippetSyntaxError> {
    let disable = match disable_iff {
        Some(d) => format!(" disable iff ({d})"),
        None => String::new(),
    };
    let text = format!(
        "property {name};\n  @({} {signal}){disable} {body};\nendproperty\n{label}: assert property({name});",
        edge.keyword()
    );
    parse_snippet(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P0: &str = "property p0; @(posedge fsm.clk) fsm.state != 2'b11; endproperty a0: assert property(p0);";

    #[test]
    fn parses_the_reference_shape() {
        let s = parse_snippet(P0).unwrap();
        assert_eq!(
            s,
            SvaSnippet {
                property_name: "p0".into(),
                sense_edge: SenseEdge::Posedge,
                sense_signal: "fsm.clk".into(),
                disable_iff: None,
                left_part: "fsm.state".into(),
                operator: SvaOperator::Ne,
                right_part: Some("2'b11".into()),
                assert_label: "a0".into(),
            }
        );
        assert_eq!(parse_snippet(&s.serialize()).unwrap(), s);
    }

    #[test]
    fn rejects_empty_and_missing_endproperty() {
        let e = parse_snippet("").unwrap_err();
        assert_eq!(e.expected, "'property'");
        let e = parse_snippet("property p; @(posedge clk) a; a0: assert property(p);").unwrap_err();
        assert_eq!(e.expected, "'endproperty'");
        assert_eq!(e.to_string(), "1:31: expected 'endproperty'");
    }

    #[test]
    fn implication_and_disable() {
        let s = parse_snippet(
            "// comment\nproperty t;\n  @(posedge m.clk) disable iff (m.rst) m.s == 2'b00 && (m.go) |=> m.s == 2'b01;\nendproperty\nat: assert property(t);",
        )
        .unwrap();
        assert_eq!(s.operator, SvaOperator::NonOverlapped);
        assert_eq!(s.disable_iff.as_deref(), Some("m.rst"));
        assert_eq!(s.left_part, "(m.s == 2'b00) && m.go");
        assert_eq!(s.right_part.as_deref(), Some("m.s == 2'b01"));
        assert_eq!(parse_snippet(&s.serialize()).unwrap(), s);
    }

    #[test]
    fn equality_split_only_at_the_root() {
        let s = parse_snippet("property q; @(posedge c) a & b == c; endproperty l: assert property(q);").unwrap();
        assert_eq!((s.operator, s.left_part.as_str()), (SvaOperator::Boolean, "a & (b == c)"));
        let s = parse_snippet("property q; @(posedge c) a == (b == c); endproperty l: assert property(q);").unwrap();
        assert_eq!(s.right_part.as_deref(), Some("(b == c)"));
        assert_eq!(parse_snippet(&s.serialize()).unwrap(), s);
    }

    #[test]
    fn sequences_rejected() {
        for body in ["a ##1 b", "a[*2] |-> b", "a |-> b |-> c"] {
            let t = format!("property q; @(posedge c) {body}; endproperty l: assert property(q);");
            assert!(parse_snippet(&t).is_err(), "{body}");
        }
        let t = "property q; @(posedge c) a; endproperty l: assert property(r);";
        assert!(parse_snippet(t).is_err());
    }
}
