//! Round-key byte-range assertions for AES fault-injection assessment.
//!
//! A faulty byte is one that differs from a golden reference signal supplied
//! by the harness, so every term has the form `key[m:l] == key_ref[m:l]`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::sva::{build_snippet, SenseEdge, SvaSnippet};

pub const KEY_WIDTH: u32 = 128;
pub const WORDS: u32 = 4;
pub const SUPPORTED_ROUND: u32 = 9;
/// Word-0 bytes the 1-to-3-byte property ranges over.
pub const SP3_1_BYTES: [u32; 3] = [1, 2, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByteOrder {
    MsbFirst,
    LsbFirst,
}

impl ByteOrder {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "msb" | "msb_first" => Some(ByteOrder::MsbFirst),
            "lsb" | "lsb_first" => Some(ByteOrder::LsbFirst),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SofiProperty {
    Sp3_1,
    Sp3_2,
}

impl SofiProperty {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sp3.1" | "sp3_1" => Some(SofiProperty::Sp3_1),
            "sp3.2" | "sp3_2" => Some(SofiProperty::Sp3_2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SofiError {
    #[error("UnsupportedRound({0}): only round 9 is defined")]
    UnsupportedRound(u32),
    #[error("invalid byte range: {0}")]
    InvalidRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteRangeSpec {
    pub signal: String,
    pub word_index: u32,
    pub byte_indices: Vec<u32>,
    pub word_width: u32,
    pub byte_order: ByteOrder,
}

impl ByteRangeSpec {
    pub fn new(
        signal: &str,
        word_index: u32,
        byte_indices: &[u32],
        word_width: u32,
        byte_order: ByteOrder,
    ) -> Result<Self, SofiError> {
        if byte_indices.is_empty() {
            return Err(SofiError::InvalidRange("no bytes selected".into()));
        }
        if word_width == 0 || !word_width.is_multiple_of(8) {
            return Err(SofiError::InvalidRange(format!("word width {word_width} is not a whole number of bytes")));
        }
        if let Some(b) = byte_indices.iter().find(|&&b| b >= word_width / 8) {
            return Err(SofiError::InvalidRange(format!("byte {b} is outside a {word_width}-bit word")));
        }
        if word_index >= WORDS {
            return Err(SofiError::InvalidRange(format!("word {word_index} is outside the key")));
        }
        Ok(ByteRangeSpec {
            signal: signal.into(),
            word_index,
            byte_indices: byte_indices.to_vec(),
            word_width,
            byte_order,
        })
    }
}

/// `(msb, lsb)` within the word for each selected byte, in selection order.
pub fn byte_to_bits(spec: &ByteRangeSpec) -> Vec<(u32, u32)> {
    let w = spec.word_width;
    spec.byte_indices
        .iter()
        .map(|&i| match spec.byte_order {
            ByteOrder::MsbFirst => (w - 1 - 8 * i, w - 8 - 8 * i),
            ByteOrder::LsbFirst => (8 * i + 7, 8 * i),
        })
        .collect()
}

/// Lowest bit of word `w` in the 128-bit key.
fn word_offset(w: u32, order: ByteOrder) -> u32 {
    match order {
        ByteOrder::MsbFirst => KEY_WIDTH - 32 * (w + 1),
        ByteOrder::LsbFirst => 32 * w,
    }
}

/// Key-relative bit ranges of the spec's bytes.
pub fn key_ranges(spec: &ByteRangeSpec) -> Vec<(u32, u32)> {
    let off = word_offset(spec.word_index, spec.byte_order);
    byte_to_bits(spec).into_iter().map(|(m, l)| (m + off, l + off)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SofiConfig {
    pub key_signal: String,
    pub ref_signal: String,
    pub round_signal: String,
    pub clock: String,
    pub byte_order: ByteOrder,
}

fn eq_term(cfg: &SofiConfig, (m, l): (u32, u32)) -> String {
    format!("{k}[{m}:{l}] == {r}[{m}:{l}]", k = cfg.key_signal, r = cfg.ref_signal)
}

fn word_range(w: u32, order: ByteOrder) -> (u32, u32) {
    let off = word_offset(w, order);
    (off + 31, off)
}

fn subsets(pool: &[u32]) -> Vec<Vec<u32>> {
    let n = pool.len();
    let mut out: Vec<Vec<u32>> =
        (1u32..(1 << n)).map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| pool[i]).collect()).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

fn make(cfg: &SofiConfig, name: &str, body: &str) -> SvaSnippet {
    build_snippet(name, SenseEdge::Posedge, &cfg.clock, None, body, &format!("assert_{name}"))
        .expect("generated SoFI snippets are well formed")
}

/// SP3.1: one snippet per non-empty subset of [`SP3_1_BYTES`] of word 0,
/// stating that when those bytes are intact in round 9 the later words are
/// too. SP3.2: one snippet per word requiring all four bytes intact.
pub fn emit_sofi_assertions(property: SofiProperty, cfg: &SofiConfig, round: u32) -> Result<Vec<SvaSnippet>, SofiError> {
    if round != SUPPORTED_ROUND {
        return Err(SofiError::UnsupportedRound(round));
    }
    let in_round = format!("{} == 4'd{round}", cfg.round_signal);
    let mut out = Vec::new();
    match property {
        SofiProperty::Sp3_1 => {
            for s in subsets(&SP3_1_BYTES) {
                let spec = ByteRangeSpec::new(&cfg.key_signal, 0, &s, 32, cfg.byte_order)?;
                let mut guard = alloc::vec![in_round.clone()];
                guard.extend(key_ranges(&spec).into_iter().map(|r| eq_term(cfg, r)));
                let later: Vec<String> = (1..WORDS).map(|w| eq_term(cfg, word_range(w, cfg.byte_order))).collect();
                let tag: String = s.iter().map(|b| char::from(b'0' + *b as u8)).collect();
                let body = format!("{} |-> {}", guard.join(" && "), later.join(" && "));
                out.push(make(cfg, &format!("sp3_1_w0_b{tag}"), &body));
            }
        }
        SofiProperty::Sp3_2 => {
            for w in 0..WORDS {
                let spec = ByteRangeSpec::new(&cfg.key_signal, w, &[0, 1, 2, 3], 32, cfg.byte_order)?;
                let bytes: Vec<String> = key_ranges(&spec).into_iter().map(|r| eq_term(cfg, r)).collect();
                let body = format!("{in_round} |-> {}", bytes.join(" && "));
                out.push(make(cfg, &format!("sp3_2_w{w}"), &body));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sva::parse_snippet;

    fn cfg(order: ByteOrder) -> SofiConfig {
        SofiConfig {
            key_signal: "aes.rk".into(),
            ref_signal: "aes.rk_ref".into(),
            round_signal: "aes.round".into(),
            clock: "aes.clk".into(),
            byte_order: order,
        }
    }

    #[test]
    fn byte_ranges() {
        let s = ByteRangeSpec::new("k", 0, &[0], 32, ByteOrder::MsbFirst).unwrap();
        assert_eq!(byte_to_bits(&s), [(31, 24)]);
        let s = ByteRangeSpec::new("k", 0, &[1, 2, 3], 32, ByteOrder::MsbFirst).unwrap();
        assert_eq!(byte_to_bits(&s), [(23, 16), (15, 8), (7, 0)]);
        let s = ByteRangeSpec::new("k", 0, &[3], 32, ByteOrder::LsbFirst).unwrap();
        assert_eq!(byte_to_bits(&s), [(31, 24)]);
        assert!(ByteRangeSpec::new("k", 0, &[], 32, ByteOrder::MsbFirst).is_err());
    }

    #[test]
    fn property_counts_and_shape() {
        let sp31 = emit_sofi_assertions(SofiProperty::Sp3_1, &cfg(ByteOrder::MsbFirst), 9).unwrap();
        assert_eq!(sp31.len(), 7);
        let sp32 = emit_sofi_assertions(SofiProperty::Sp3_2, &cfg(ByteOrder::MsbFirst), 9).unwrap();
        assert_eq!(sp32.len(), 4);
        let right = sp32[1].right_part.as_deref().unwrap();
        assert!(right.contains("(aes.rk[95:88] == aes.rk_ref[95:88])") && right.contains("[71:64]"), "{right}");
        for s in sp31.iter().chain(&sp32) {
            assert_eq!(parse_snippet(&s.serialize()).unwrap(), *s);
        }
        assert_eq!(
            emit_sofi_assertions(SofiProperty::Sp3_2, &cfg(ByteOrder::MsbFirst), 5).unwrap_err(),
            SofiError::UnsupportedRound(5)
        );
    }
}
