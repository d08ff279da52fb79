//! Sized Verilog constants (`<width>'<base><digits>`).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

/// A fully known sized constant. Values wider than 128 bits are not modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitConstant {
    pub width: u32,
    pub value: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitConstantError {
    #[error("not a sized constant: {0}")]
    Malformed(String),
    #[error("digit '{digit}' is not valid for base '{base}'")]
    BadDigit { base: char, digit: char },
    #[error("width {0} out of range 1..=128")]
    Width(u32),
    #[error("value does not fit in {0} bits")]
    Overflow(u32),
}

pub const MAX_WIDTH: u32 = 128;

pub fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl BitConstant {
    pub fn new(width: u32, value: u128) -> Option<Self> {
        if width == 0 || width > MAX_WIDTH || value & !mask(width) != 0 {
            return None;
        }
        Some(BitConstant { width, value })
    }

    /// Strict parse: a sized literal with only 0-9a-f digits (no x/z), whose
    /// value fits the declared width.
    pub fn parse(text: &str) -> Result<Self, BitConstantError> {
        let text = text.trim();
        let malformed = || BitConstantError::Malformed(text.into());
        let (w, rest) = text.split_once('\'').ok_or_else(malformed)?;
        let w = w.trim();
        if w.is_empty() || !w.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let width: u32 = w.parse().map_err(|_| malformed())?;
        if width == 0 || width > MAX_WIDTH {
            return Err(BitConstantError::Width(width));
        }
        let mut chars = rest.chars();
        let base = chars.next().ok_or_else(malformed)?.to_ascii_lowercase();
        let radix = match base {
            'b' => 2,
            'o' => 8,
            'd' => 10,
            'h' => 16,
            _ => return Err(malformed()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || digits.starts_with('_') {
            return Err(malformed());
        }
        let mut value: u128 = 0;
        for c in digits.chars() {
            if c == '_' {
                continue;
            }
            let d = c.to_digit(radix).ok_or(BitConstantError::BadDigit { base, digit: c })?;
            value = value
                .checked_mul(radix as u128)
                .and_then(|v| v.checked_add(d as u128))
                .ok_or(BitConstantError::Overflow(width))?;
        }
        if value & !mask(width) != 0 {
            return Err(BitConstantError::Overflow(width));
        }
        Ok(BitConstant { width, value })
    }

    /// Parses a comma separated list of constants.
    pub fn parse_list(text: &str) -> Result<Vec<Self>, BitConstantError> {
        text.split(',').map(BitConstant::parse).collect()
    }

    /// Binary literal with every bit written out.
    pub fn to_binary(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{}'b", self.width);
        for i in (0..self.width).rev() {
            s.push(if (self.value >> i) & 1 == 1 { '1' } else { '0' });
        }
        s
    }

    /// Hex literal padded to the width.
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4) as usize;
        let mut s = String::new();
        let _ = write!(s, "{}'h{:0digits$x}", self.width, self.value, digits = digits);
        s
    }
}

/// Canonical spelling: binary up to 16 bits, hex above.
impl fmt::Display for BitConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width <= 16 {
            f.write_str(&self.to_binary())
        } else {
            f.write_str(&self.to_hex())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn parses_each_base() {
        assert_eq!(BitConstant::parse("2'b11").unwrap(), BitConstant { width: 2, value: 3 });
        assert_eq!(BitConstant::parse("4'hF").unwrap().value, 15);
        assert_eq!(BitConstant::parse("8'd255").unwrap().value, 255);
        assert_eq!(BitConstant::parse("6'o17").unwrap().value, 15);
        assert_eq!(BitConstant::parse("8'b1010_0101").unwrap().value, 0xa5);
    }

    #[test]
    fn digit_table_rejections() {
        // x/z are never accepted, and each base only takes its own digits
        assert!(matches!(
            BitConstant::parse("2'bzz"),
            Err(BitConstantError::BadDigit { base: 'b', digit: 'z' })
        ));
        assert!(BitConstant::parse("2'b12").is_err());
        assert!(BitConstant::parse("3'o8").is_err());
        assert!(BitConstant::parse("4'dA").is_err());
        assert!(BitConstant::parse("4'hG").is_err());
        assert!(BitConstant::parse("4'hx").is_err());
        assert!(BitConstant::parse("2'b111").is_err());
        assert!(BitConstant::parse("0'b0").is_err());
        assert!(BitConstant::parse("'b0").is_err());
        assert!(BitConstant::parse("3'b001'").is_err());
    }

    #[test]
    fn display_round_trips() {
        for c in [BitConstant::new(2, 3).unwrap(), BitConstant::new(32, 0xdead).unwrap()] {
            assert_eq!(BitConstant::parse(&c.to_string()).unwrap(), c);
        }
        assert_eq!(BitConstant::new(2, 3).unwrap().to_string(), "2'b11");
        assert_eq!(BitConstant::new(32, 0xff).unwrap().to_string(), "32'h000000ff");
    }
}
