//! Constant-expression evaluation for parameters, ranges and case labels.

use alloc::collections::BTreeMap;
use alloc::string::String;

use super::ast::{BinaryOp, Expr, UnaryOp};
use crate::bits::mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstVal {
    pub width: u32,
    pub value: u128,
    /// False for unsized literals (treated as 32 bits).
    pub sized: bool,
}

impl ConstVal {
    fn new(width: u32, value: u128, sized: bool) -> Self {
        let width = width.clamp(1, 128);
        ConstVal { width, value: value & mask(width), sized }
    }

    fn bool(b: bool) -> Self {
        ConstVal { width: 1, value: b as u128, sized: true }
    }
}

pub type ConstEnv = BTreeMap<String, ConstVal>;

pub fn eval_const(e: &Expr, env: &ConstEnv) -> Option<ConstVal> {
    Some(match e {
        Expr::Number(n) => {
            let v = n.value?;
            match n.width {
                Some(w) => ConstVal::new(w, v, true),
                None => ConstVal::new(32, v, false),
            }
        }
        Expr::Ident(name) => *env.get(name)?,
        Expr::Unary(op, inner) => {
            let a = eval_const(inner, env)?;
            match op {
                UnaryOp::Not => ConstVal::bool(a.value == 0),
                UnaryOp::BitNot => ConstVal::new(a.width, !a.value, a.sized),
                UnaryOp::Neg => ConstVal::new(a.width, a.value.wrapping_neg(), a.sized),
                UnaryOp::Plus => a,
                UnaryOp::RedAnd => ConstVal::bool(a.value == mask(a.width)),
                UnaryOp::RedOr => ConstVal::bool(a.value != 0),
                UnaryOp::RedXor => ConstVal::bool(a.value.count_ones() % 2 == 1),
                UnaryOp::RedNand => ConstVal::bool(a.value != mask(a.width)),
                UnaryOp::RedNor => ConstVal::bool(a.value == 0),
                UnaryOp::RedXnor => ConstVal::bool(a.value.count_ones() % 2 == 0),
            }
        }
        Expr::Binary(op, a, b) => {
            let a = eval_const(a, env)?;
            let b = eval_const(b, env)?;
            let w = a.width.max(b.width);
            let sized = a.sized && b.sized;
            use BinaryOp::*;
            match op {
                Pow => ConstVal::new(w, a.value.checked_pow(u32::try_from(b.value).ok()?)?, sized),
                Mul => ConstVal::new(w, a.value.wrapping_mul(b.value), sized),
                Div => ConstVal::new(w, a.value.checked_div(b.value)?, sized),
                Mod => ConstVal::new(w, a.value.checked_rem(b.value)?, sized),
                Add => ConstVal::new(w, a.value.wrapping_add(b.value), sized),
                Sub => ConstVal::new(w, a.value.wrapping_sub(b.value), sized),
                Shl | AShl => {
                    let s = u32::try_from(b.value).ok().filter(|s| *s < 128)?;
                    ConstVal::new(a.width, a.value << s, a.sized)
                }
                Shr | AShr => {
                    let s = u32::try_from(b.value).ok().filter(|s| *s < 128)?;
                    ConstVal::new(a.width, a.value >> s, a.sized)
                }
                Lt => ConstVal::bool(a.value < b.value),
                Le => ConstVal::bool(a.value <= b.value),
                Gt => ConstVal::bool(a.value > b.value),
                Ge => ConstVal::bool(a.value >= b.value),
                Eq | CaseEq => ConstVal::bool(a.value == b.value),
                Ne | CaseNe => ConstVal::bool(a.value != b.value),
                BitAnd => ConstVal::new(w, a.value & b.value, sized),
                BitNand => ConstVal::new(w, !(a.value & b.value), sized),
                BitXor => ConstVal::new(w, a.value ^ b.value, sized),
                BitXnor => ConstVal::new(w, !(a.value ^ b.value), sized),
                BitOr => ConstVal::new(w, a.value | b.value, sized),
                BitNor => ConstVal::new(w, !(a.value | b.value), sized),
                LogAnd => ConstVal::bool(a.value != 0 && b.value != 0),
                LogOr => ConstVal::bool(a.value != 0 || b.value != 0),
            }
        }
        Expr::Ternary(c, a, b) => {
            let c = eval_const(c, env)?;
            let (a, b) = (eval_const(a, env)?, eval_const(b, env)?);
            let pick = if c.value != 0 { a } else { b };
            ConstVal::new(a.width.max(b.width), pick.value, a.sized && b.sized)
        }
        Expr::Concat(items) => {
            let mut width = 0u32;
            let mut value = 0u128;
            for item in items {
                let v = eval_const(item, env)?;
                width = width.checked_add(v.width).filter(|w| *w <= 128)?;
                value = (value << v.width) | v.value;
            }
            ConstVal::new(width, value, true)
        }
        Expr::Replicate(n, items) => {
            let n = eval_const(n, env)?.value;
            let inner = eval_const(&Expr::Concat(items.clone()), env)?;
            let mut width = 0u32;
            let mut value = 0u128;
            for _ in 0..n {
                width = width.checked_add(inner.width).filter(|w| *w <= 128)?;
                value = (value << inner.width) | inner.value;
            }
            ConstVal::new(width, value, true)
        }
        Expr::Call(name, args) if name == "$clog2" && args.len() == 1 => {
            let v = eval_const(&args[0], env)?.value;
            let bits = if v <= 1 { 0 } else { 128 - (v - 1).leading_zeros() };
            ConstVal::new(32, bits as u128, false)
        }
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parser::parse_expression;

    fn ev(src: &str, env: &ConstEnv) -> Option<ConstVal> {
        eval_const(&parse_expression(src).unwrap(), env)
    }

    #[test]
    fn literals_and_arithmetic() {
        let env = ConstEnv::new();
        assert_eq!(ev("2'b10", &env).unwrap().value, 2);
        assert_eq!(ev("4 * 2 - 1", &env).unwrap().value, 7);
        assert_eq!(ev("{2'b01, 2'b10}", &env).unwrap(), ConstVal { width: 4, value: 6, sized: true });
        assert_eq!(ev("$clog2(5)", &env).unwrap().value, 3);
        assert_eq!(ev("~2'b01", &env).unwrap().value, 2);
        assert!(ev("4'bx01", &env).is_none());
    }

    #[test]
    fn identifiers_resolve_through_env() {
        let mut env = ConstEnv::new();
        env.insert("W".into(), ConstVal { width: 32, value: 8, sized: false });
        assert_eq!(ev("W-1", &env).unwrap().value, 7);
        assert!(ev("missing + 1", &env).is_none());
    }
}
