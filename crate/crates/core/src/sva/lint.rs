//! Repairs malformed sized constants: `3'b001'` (stray trailing quote or
//! backtick), `2''b01` (doubled apostrophe) and `2'bb01` (doubled base).

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairKind {
    TrailingQuote,
    DoubledApostrophe,
    DoubledBase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub kind: RepairKind,
    /// Position of the removed character in the input, 1-based.
    pub line: u32,
    pub col: u32,
    /// The constant as written, including the removed characters.
    pub original: String,
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

fn radix_digit(c: u8) -> bool {
    c.is_ascii_hexdigit() || matches!(c, b'x' | b'X' | b'z' | b'Z' | b'?' | b'_')
}

fn position(src: &[u8], offset: usize) -> (u32, u32) {
    let before = &src[..offset];
    let line = before.iter().filter(|b| **b == b'\n').count() as u32 + 1;
    let line_start = before.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
    let col = core::str::from_utf8(&src[line_start..offset]).map_or(0, |s| s.chars().count()) as u32 + 1;
    (line, col)
}

/// Returns the repaired text and one record per removed character run.
pub fn lint_constants(text: &str) -> (String, Vec<Repair>) {
    let src = text.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(src.len());
    let mut repairs = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i];
        let starts_number = c.is_ascii_digit() && (i == 0 || !is_ident_char(src[i - 1]));
        if !starts_number {
            out.push(c);
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i;
        while j < src.len() && (src[j].is_ascii_digit() || src[j] == b'_') {
            j += 1;
        }
        if j >= src.len() || src[j] != b'\'' {
            out.extend_from_slice(&src[start..j]);
            i = j;
            continue;
        }
        // sized constant: width ' [extra '] [s] base [dup base] digits [stray quote]
        let mut removed: Vec<(RepairKind, usize)> = Vec::new();
        let mut k = j + 1;
        while k < src.len() && src[k] == b'\'' {
            removed.push((RepairKind::DoubledApostrophe, k));
            k += 1;
        }
        let signed = k < src.len() && matches!(src[k], b's' | b'S');
        let base_at = if signed { k + 1 } else { k };
        let Some(&base) = src.get(base_at).filter(|b| matches!(b.to_ascii_lowercase(), b'b' | b'o' | b'd' | b'h'))
        else {
            // not a based literal; leave it alone
            out.extend_from_slice(&src[start..=j]);
            i = j + 1;
            continue;
        };
        let mut d = base_at + 1;
        // a repeated base letter is never a digit of its own radix
        while d < src.len() && src[d].eq_ignore_ascii_case(&base) {
            removed.push((RepairKind::DoubledBase, d));
            d += 1;
        }
        let digits_start = d;
        while d < src.len() && radix_digit(src[d]) {
            d += 1;
        }
        if d == digits_start {
            out.extend_from_slice(&src[start..d]);
            i = d;
            continue;
        }
        let mut end = d;
        while end < src.len() && matches!(src[end], b'\'' | b'`') {
            removed.push((RepairKind::TrailingQuote, end));
            end += 1;
        }
        let skip: Vec<usize> = removed.iter().map(|(_, p)| *p).collect();
        for (p, b) in src.iter().enumerate().take(end).skip(start) {
            if !skip.contains(&p) {
                out.push(*b);
            }
        }
        let original = String::from_utf8_lossy(&src[start..end]).into_owned();
        let mut last_kind = None;
        for (kind, p) in removed {
            // one record per run of the same repair
            if last_kind == Some(kind) {
                continue;
            }
            last_kind = Some(kind);
            let (line, col) = position(src, p);
            repairs.push(Repair { kind, line, col, original: original.clone() });
        }
        i = end;
    }
    (String::from_utf8(out).expect("only ASCII bytes are removed"), repairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_quote_removed() {
        let (t, r) = lint_constants("3'b001'");
        assert_eq!(t, "3'b001");
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].kind, r[0].line, r[0].col), (RepairKind::TrailingQuote, 1, 7));
    }

    #[test]
    fn clean_text_unchanged() {
        let (t, r) = lint_constants("3'b001 && x[3:0] == 4'hF && 8'd9 == 'h3");
        assert_eq!(t, "3'b001 && x[3:0] == 4'hF && 8'd9 == 'h3");
        assert!(r.is_empty());
    }

    #[test]
    fn two_repairs() {
        let (t, r) = lint_constants("x != 2'b11' && y == 4'hF'");
        assert_eq!(t, "x != 2'b11 && y == 4'hF");
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn doubled_apostrophe_and_base() {
        let (t, r) = lint_constants("a == 2''b01 || b == 2'bb10 || c == 8'hhFF`");
        assert_eq!(t, "a == 2'b01 || b == 2'b10 || c == 8'hFF");
        let kinds: Vec<RepairKind> = r.iter().map(|r| r.kind).collect();
        assert_eq!(
            kinds,
            [RepairKind::DoubledApostrophe, RepairKind::DoubledBase, RepairKind::DoubledBase, RepairKind::TrailingQuote]
        );
    }

    #[test]
    fn hex_digit_b_is_not_a_doubled_base() {
        let (t, r) = lint_constants("4'hb == 8'hbb");
        assert_eq!(t, "4'hb == 8'hbb");
        assert!(r.is_empty());
    }

    #[test]
    fn idempotent() {
        let (once, _) = lint_constants("3'b001'' 2''bb1` foo1'b0");
        let (twice, r) = lint_constants(&once);
        assert_eq!(once, twice);
        assert!(r.is_empty());
    }
}
