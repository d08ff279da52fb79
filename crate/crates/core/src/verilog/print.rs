//! Canonical Verilog text for the syntax tree. Re-parsing printed output
//! yields a structurally equal tree.

use alloc::string::String;
use core::fmt::Write;

use super::ast::*;

pub fn print_source(file: &SourceFile) -> String {
    let mut out = String::new();
    for (i, m) in file.modules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_module(m, &mut out);
    }
    out
}

fn print_range(r: &Option<Range>, out: &mut String) {
    if let Some(r) = r {
        let _ = write!(out, "[{}:{}] ", expr_to_string(&r.msb), expr_to_string(&r.lsb));
    }
}

fn print_port(p: &PortDecl, out: &mut String) {
    out.push_str(p.dir.keyword());
    out.push(' ');
    if let Some(n) = p.net {
        out.push_str(n.keyword());
        out.push(' ');
    }
    if p.signed {
        out.push_str("signed ");
    }
    print_range(&p.range, out);
    out.push_str(&p.name);
}

fn print_param(p: &ParamDecl, out: &mut String) {
    out.push_str(if p.local { "localparam " } else { "parameter " });
    print_range(&p.range, out);
    let _ = write!(out, "{} = {}", p.name, expr_to_string(&p.value));
}

fn print_connections(cs: &[Connection], out: &mut String) {
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match (&c.port, &c.expr) {
            (Some(p), Some(e)) => {
                let _ = write!(out, ".{p}({})", expr_to_string(e));
            }
            (Some(p), None) => {
                let _ = write!(out, ".{p}()");
            }
            (None, Some(e)) => out.push_str(&expr_to_string(e)),
            (None, None) => {}
        }
    }
}

pub fn print_module(m: &Module, out: &mut String) {
    let _ = write!(out, "module {}", m.name);
    if !m.params.is_empty() {
        out.push_str(" #(");
        for (i, p) in m.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            print_param(p, out);
        }
        out.push(')');
    }
    out.push_str(" (");
    match &m.ports {
        PortList::Ansi(ports) => {
            for (i, p) in ports.iter().enumerate() {
                out.push_str(if i > 0 { ",\n  " } else { "\n  " });
                print_port(p, out);
            }
            if !ports.is_empty() {
                out.push('\n');
            }
        }
        PortList::Names(names) => out.push_str(&names.join(", ")),
    }
    out.push_str(");\n");
    for item in &m.items {
        print_item(item, out);
    }
    out.push_str("endmodule\n");
}

fn print_item(item: &Item, out: &mut String) {
    match item {
        Item::Ports(ps) => {
            // all declarations in one item share direction and type
            let first = &ps[0];
            print_port(first, out);
            for p in &ps[1..] {
                let _ = write!(out, ", {}", p.name);
            }
            out.push_str(";\n");
        }
        Item::Nets(n) => {
            out.push_str("  ");
            out.push_str(n.kind.keyword());
            out.push(' ');
            if n.signed {
                out.push_str("signed ");
            }
            print_range(&n.range, out);
            for (i, v) in n.vars.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&v.name);
                for d in &v.dims {
                    let _ = write!(out, " [{}:{}]", expr_to_string(&d.msb), expr_to_string(&d.lsb));
                }
                if let Some(e) = &v.init {
                    let _ = write!(out, " = {}", expr_to_string(e));
                }
            }
            out.push_str(";\n");
        }
        Item::Params(ps) => {
            out.push_str("  ");
            print_param(&ps[0], out);
            for p in &ps[1..] {
                out.push_str(", ");
                print_range(&p.range, out);
                let _ = write!(out, "{} = {}", p.name, expr_to_string(&p.value));
            }
            out.push_str(";\n");
        }
        Item::Assign(pairs) => {
            out.push_str("  assign ");
            for (i, (l, r)) in pairs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{} = {}", expr_to_string(l), expr_to_string(r));
            }
            out.push_str(";\n");
        }
        Item::Always(b) => {
            out.push_str("  always ");
            match &b.sensitivity {
                Sensitivity::Star => out.push_str("@(*)"),
                Sensitivity::List(events) => {
                    out.push_str("@(");
                    for (i, e) in events.iter().enumerate() {
                        if i > 0 {
                            out.push_str(" or ");
                        }
                        if let Some(edge) = e.edge {
                            out.push_str(edge.keyword());
                            out.push(' ');
                        }
                        out.push_str(&expr_to_string(&e.signal));
                    }
                    out.push(')');
                }
            }
            out.push('\n');
            print_stmt(&b.body, 2, out);
        }
        Item::Initial(s, _) => {
            out.push_str("  initial\n");
            print_stmt(s, 2, out);
        }
        Item::Instance(insts) => {
            let first = &insts[0];
            let _ = write!(out, "  {}", first.module);
            if !first.params.is_empty() {
                out.push_str(" #(");
                print_connections(&first.params, out);
                out.push(')');
            }
            for (i, inst) in insts.iter().enumerate() {
                out.push_str(if i > 0 { ", " } else { " " });
                let _ = write!(out, "{} (", inst.name);
                print_connections(&inst.connections, out);
                out.push(')');
            }
            out.push_str(";\n");
        }
        Item::Unsupported { text, .. } => {
            let _ = writeln!(out, "  {text}");
        }
    }
}

fn indent(n: usize, out: &mut String) {
    for _ in 0..n {
        out.push_str("  ");
    }
}

pub fn print_stmt(s: &Stmt, depth: usize, out: &mut String) {
    match s {
        Stmt::Block { label, stmts } => {
            indent(depth, out);
            out.push_str("begin");
            if let Some(l) = label {
                let _ = write!(out, " : {l}");
            }
            out.push('\n');
            for s in stmts {
                print_stmt(s, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("end\n");
        }
        Stmt::If { cond, then, otherwise } => {
            indent(depth, out);
            let _ = writeln!(out, "if ({})", expr_to_string(cond));
            print_stmt(then, depth + 1, out);
            if let Some(o) = otherwise {
                indent(depth, out);
                out.push_str("else\n");
                print_stmt(o, depth + 1, out);
            }
        }
        Stmt::Case { kind, expr, arms } => {
            indent(depth, out);
            let _ = writeln!(out, "{} ({})", kind.keyword(), expr_to_string(expr));
            for arm in arms {
                indent(depth + 1, out);
                if arm.labels.is_empty() {
                    out.push_str("default:\n");
                } else {
                    let labels: alloc::vec::Vec<String> = arm.labels.iter().map(expr_to_string).collect();
                    let _ = writeln!(out, "{}:", labels.join(", "));
                }
                print_stmt(&arm.body, depth + 2, out);
            }
            indent(depth, out);
            out.push_str("endcase\n");
        }
        Stmt::Assign { lhs, rhs, nonblocking, .. } => {
            indent(depth, out);
            let op = if *nonblocking { "<=" } else { "=" };
            let _ = writeln!(out, "{} {op} {};", expr_to_string(lhs), expr_to_string(rhs));
        }
        Stmt::Null => {
            indent(depth, out);
            out.push_str(";\n");
        }
        Stmt::Unsupported { text, .. } => {
            indent(depth, out);
            out.push_str(text);
            out.push('\n');
        }
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn is_compound(e: &Expr) -> bool {
    matches!(e, Expr::Binary(..) | Expr::Ternary(..) | Expr::Unary(..))
}

fn write_operand(e: &Expr, out: &mut String) {
    if is_compound(e) && !matches!(e, Expr::Unary(..)) {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_list(es: &[Expr], out: &mut String) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(e, out);
    }
}

/// Nested binary/ternary operands are always parenthesized, so the printed
/// text reparses to the same tree regardless of precedence.
pub fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Ident(s) => out.push_str(s),
        Expr::Number(n) => out.push_str(&n.text),
        Expr::Str(s) => out.push_str(s),
        Expr::Unary(op, inner) => {
            out.push_str(op.symbol());
            if is_compound(inner) {
                out.push('(');
                write_expr(inner, out);
                out.push(')');
            } else {
                write_expr(inner, out);
            }
        }
        Expr::Binary(op, a, b) => {
            write_operand(a, out);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(b, out);
        }
        Expr::Ternary(c, a, b) => {
            write_operand(c, out);
            out.push_str(" ? ");
            write_operand(a, out);
            out.push_str(" : ");
            write_operand(b, out);
        }
        Expr::Index(b, i) => {
            write_selectable(b, out);
            out.push('[');
            write_expr(i, out);
            out.push(']');
        }
        Expr::Slice(b, m, l) => {
            write_selectable(b, out);
            out.push('[');
            write_expr(m, out);
            out.push(':');
            write_expr(l, out);
            out.push(']');
        }
        Expr::PartSelect { base, start, up, width } => {
            write_selectable(base, out);
            out.push('[');
            write_expr(start, out);
            out.push_str(if *up { " +: " } else { " -: " });
            write_expr(width, out);
            out.push(']');
        }
        Expr::Concat(es) => {
            out.push('{');
            write_list(es, out);
            out.push('}');
        }
        Expr::Replicate(n, es) => {
            out.push('{');
            write_expr(n, out);
            out.push('{');
            write_list(es, out);
            out.push_str("}}");
        }
        Expr::Call(name, args) => {
            out.push_str(name);
            if !args.is_empty() || !name.starts_with('$') {
                out.push('(');
                write_list(args, out);
                out.push(')');
            }
        }
    }
}

fn write_selectable(e: &Expr, out: &mut String) {
    if is_compound(e) {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}
