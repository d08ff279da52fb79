//! Tokenizer shared by the Verilog front end, the SVA snippet parser and the
//! consistency classifier. Comments and whitespace are dropped.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    /// `$name`
    SysIdent,
    Number,
    Str,
    Punct,
    /// `` `name ``; the parser decides how much of the line it owns.
    Directive,
    /// A character no rule accepts. Only produced by [`tokenize_lossy`].
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokKind,
    pub text: &'a str,
    pub line: u32,
    pub col: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl<'a> Token<'a> {
    pub fn is(&self, text: &str) -> bool {
        matches!(self.kind, TokKind::Punct | TokKind::Ident) && self.text == text
    }

    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: alloc::string::String,
}

const PUNCT: &[&str] = &[
    "<<<", ">>>", "===", "!==", "|->", "|=>", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "~&",
    "~|", "~^", "^~", "##", "->", "+:", "-:", "**", "::", "(", ")", "[", "]", "{", "}", ";", ",",
    ":", ".", "@", "#", "=", "<", ">", "+", "-", "*", "/", "%", "!", "~", "&", "|", "^", "?",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.as_bytes().get(self.pos + n).copied()
    }

    fn bump(&mut self) {
        if let Some(c) = self.src[self.pos..].chars().next() {
            self.pos += c.len_utf8();
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }

    fn bump_while(&mut self, f: impl Fn(u8) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.bump();
        }
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Some(c), _) if c.is_ascii_whitespace() => self.bump(),
                (Some(b'/'), Some(b'/')) => self.bump_while(|c| c != b'\n'),
                (Some(b'/'), Some(b'*')) => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek_at(1)) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => self.bump(),
                            (None, _) => {
                                return Err(LexError {
                                    line,
                                    col,
                                    message: "unterminated block comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

fn is_base(c: u8) -> bool {
    matches!(c.to_ascii_lowercase(), b'b' | b'o' | b'd' | b'h')
}

fn is_based_digit(c: u8) -> bool {
    c.is_ascii_hexdigit() || matches!(c, b'x' | b'X' | b'z' | b'Z' | b'?' | b'_')
}

/// Length of a base specifier starting at an apostrophe (`'b`, `'sh`), or 0.
fn base_spec_len(cur: &Cursor<'_>) -> usize {
    if cur.peek() != Some(b'\'') {
        return 0;
    }
    match (cur.peek_at(1), cur.peek_at(2)) {
        (Some(s), Some(b)) if (s == b's' || s == b'S') && is_base(b) => 3,
        (Some(b), _) if is_base(b) => 2,
        _ => 0,
    }
}

fn next_token<'a>(cur: &mut Cursor<'a>, lossy: bool) -> Result<Option<Token<'a>>, LexError> {
    cur.skip_trivia()?;
    let Some(c) = cur.peek() else { return Ok(None) };
    let (start, line, col) = (cur.pos, cur.line, cur.col);
    let kind = if is_ident_start(c) {
        cur.bump_while(is_ident_char);
        TokKind::Ident
    } else if c == b'$' && cur.peek_at(1).is_some_and(is_ident_start) {
        cur.bump();
        cur.bump_while(is_ident_char);
        TokKind::SysIdent
    } else if c.is_ascii_digit() {
        cur.bump_while(|c| c.is_ascii_digit() || c == b'_');
        let n = base_spec_len(cur);
        if n > 0 {
            for _ in 0..n {
                cur.bump();
            }
            cur.bump_while(is_based_digit);
        } else if cur.peek() == Some(b'.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
            cur.bump_while(|c| c.is_ascii_digit());
        }
        TokKind::Number
    } else if c == b'\'' && base_spec_len(cur) > 0 {
        for _ in 0..base_spec_len(cur) {
            cur.bump();
        }
        cur.bump_while(is_based_digit);
        TokKind::Number
    } else if c == b'\'' && matches!(cur.peek_at(1), Some(b'0' | b'1' | b'x' | b'z')) {
        cur.bump();
        cur.bump();
        TokKind::Number
    } else if c == b'"' {
        cur.bump();
        loop {
            match cur.peek() {
                Some(b'\\') => {
                    cur.bump();
                    cur.bump();
                }
                Some(b'"') => {
                    cur.bump();
                    break;
                }
                Some(b'\n') | None => {
                    return Err(LexError { line, col, message: "unterminated string".into() })
                }
                Some(_) => cur.bump(),
            }
        }
        TokKind::Str
    } else if c == b'`' && cur.peek_at(1).is_some_and(is_ident_start) {
        cur.bump();
        cur.bump_while(is_ident_char);
        TokKind::Directive
    } else if let Some(p) = PUNCT.iter().find(|p| cur.src[cur.pos..].starts_with(**p)) {
        for _ in 0..p.len() {
            cur.bump();
        }
        TokKind::Punct
    } else if lossy {
        cur.bump();
        TokKind::Unknown
    } else {
        let ch = cur.src[cur.pos..].chars().next().unwrap_or('?');
        return Err(LexError { line, col, message: alloc::format!("unexpected character '{ch}'") });
    };
    Ok(Some(Token { kind, text: &cur.src[start..cur.pos], line, col, offset: start }))
}

/// Strict tokenization; any unknown character is an error.
pub fn tokenize(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    let mut cur = Cursor { src, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(t) = next_token(&mut cur, false)? {
        out.push(t);
    }
    Ok(out)
}

/// Never fails on characters: unknown ones become [`TokKind::Unknown`] tokens.
/// An unterminated comment or string swallows the rest of the input as one
/// `Unknown` token.
pub fn tokenize_lossy(src: &str) -> Vec<Token<'_>> {
    let mut cur = Cursor { src, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        let before = (cur.pos, cur.line, cur.col);
        match next_token(&mut cur, true) {
            Ok(Some(t)) => out.push(t),
            Ok(None) => break,
            Err(_) => {
                out.push(Token {
                    kind: TokKind::Unknown,
                    text: &src[before.0..],
                    line: before.1,
                    col: before.2,
                    offset: before.0,
                });
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn texts(src: &str) -> Vec<&str> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn numbers_and_operators() {
        assert_eq!(
            texts("a <= 2'b01; b |=> 4'hF // c\n/* d */ 'b1 8'sd3"),
            vec!["a", "<=", "2'b01", ";", "b", "|=>", "4'hF", "'b1", "8'sd3"]
        );
    }

    #[test]
    fn trailing_quote_is_a_separate_token() {
        let toks = tokenize_lossy("3'b001'");
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].text, "3'b001");
        assert_eq!(toks[1].kind, TokKind::Unknown);
        assert!(tokenize("3'b001'").is_err());
    }

    #[test]
    fn lines_and_columns() {
        let toks = tokenize("module m;\n  endmodule").unwrap();
        assert_eq!((toks[3].line, toks[3].col), (2, 3));
    }

    #[test]
    fn system_identifiers_and_directives() {
        let toks = tokenize("`timescale $isunknown(x)").unwrap();
        assert_eq!(toks[0].kind, TokKind::Directive);
        assert_eq!(toks[1].kind, TokKind::SysIdent);
    }

    #[test]
    fn unterminated_comment() {
        assert!(tokenize("a /* b").is_err());
    }
}
