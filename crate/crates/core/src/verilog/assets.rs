//! Sensitive-signal marking for the information-leakage threat.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::Direction;
use super::design::ModuleInfo;

/// Name fragments (case-insensitive) that mark a signal as sensitive.
pub const DEFAULT_SENSITIVE_PATTERNS: &[&str] = &["key", "secret", "password", "priv"];

/// Ports and registers whose names contain one of `patterns`, plus any
/// `extra` names declared in the module. Clock and reset are never
/// sensitive. Order follows declaration order.
pub fn sensitive_signals(module: &ModuleInfo, patterns: &[&str], extra: &[String]) -> Vec<String> {
    let excluded = |n: &str| {
        module.clock.as_deref() == Some(n) || module.reset.as_ref().is_some_and(|r| r.signal == n)
    };
    module
        .signals
        .iter()
        .filter(|s| !excluded(&s.name) && !s.is_array)
        .filter(|s| {
            let lower = s.name.to_ascii_lowercase();
            let by_pattern = patterns.iter().any(|p| lower.contains(&p.to_ascii_lowercase()));
            let is_output = module.port(&s.name).is_some_and(|p| p.direction == Direction::Output);
            // outputs are where a leak shows up, not what leaks
            (by_pattern && !is_output) || extra.contains(&s.name)
        })
        .map(|s| s.name.to_string())
        .collect()
}

/// Outputs a sensitive signal could be copied to verbatim: same width,
/// different name.
pub fn leak_targets(module: &ModuleInfo, signal: &str) -> Vec<String> {
    let Some(width) = module.signal(signal).map(|s| s.width) else { return Vec::new() };
    module
        .outputs()
        .filter(|p| p.width == width && p.name != signal)
        .map(|p| p.name.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parse_design;

    const SRC: &str = "module lock(input clk, input rst, input [7:0] key_in, input [7:0] data,
                                   output reg [7:0] dout, output ok);
        reg [7:0] secret_reg;
        reg [3:0] priv_level;
        always @(posedge clk) if (rst) secret_reg <= 0; else secret_reg <= key_in;
      endmodule";

    #[test]
    fn pattern_and_sideband_marking() {
        let d = parse_design(SRC, None, "l.v").unwrap();
        let m = d.top();
        assert_eq!(sensitive_signals(m, DEFAULT_SENSITIVE_PATTERNS, &[]), ["key_in", "secret_reg", "priv_level"]);
        let extra = ["data".to_string()];
        assert_eq!(sensitive_signals(m, &["secret"], &extra), ["data", "secret_reg"]);
    }

    #[test]
    fn targets_match_width() {
        let d = parse_design(SRC, None, "l.v").unwrap();
        assert_eq!(leak_targets(d.top(), "secret_reg"), ["dout"]);
        assert!(leak_targets(d.top(), "priv_level").is_empty());
    }
}
