//! Chains shipped with the tool, embedded at build time.

use alloc::string::String;

use super::{load_chain, ThreatChain, ThreatId};

macro_rules! sq {
    ($threat:literal, $id:literal) => {
        ($id, include_str!(concat!("../../chains/", $threat, "/", $id, ".sq")))
    };
}

const UNUSED_STATES: &[(&str, &str)] = &[
    sq!("unused_states", "module_name"),
    sq!("unused_states", "io_ports"),
    sq!("unused_states", "clock_reset"),
    sq!("unused_states", "reset_polarity"),
    sq!("unused_states", "state_register"),
    sq!("unused_states", "defined_states"),
    sq!("unused_states", "unused_states"),
    sq!("unused_states", "property_format"),
    sq!("unused_states", "unused_state_sva"),
];

const STATE_TRANSITION: &[(&str, &str)] = &[
    sq!("state_transition", "module_name"),
    sq!("state_transition", "io_ports"),
    sq!("state_transition", "clock_reset"),
    sq!("state_transition", "reset_polarity"),
    sq!("state_transition", "state_register"),
    sq!("state_transition", "state_labels"),
    sq!("state_transition", "state_encodings"),
    sq!("state_transition", "transition_inputs"),
    sq!("state_transition", "transitions"),
    sq!("state_transition", "property_format"),
    sq!("state_transition", "transition_operator"),
    sq!("state_transition", "transition_sva"),
];

const INFO_LEAKAGE: &[(&str, &str)] = &[
    sq!("info_leakage", "module_name"),
    sq!("info_leakage", "io_ports"),
    sq!("info_leakage", "clock_reset"),
    sq!("info_leakage", "reset_polarity"),
    sq!("info_leakage", "observable_outputs"),
    sq!("info_leakage", "candidates"),
    sq!("info_leakage", "signal_widths"),
    sq!("info_leakage", "leak_paths"),
    sq!("info_leakage", "property_format"),
    sq!("info_leakage", "leak_sva"),
];

const INCORRECT_INIT: &[(&str, &str)] = &[
    sq!("incorrect_init", "module_name"),
    sq!("incorrect_init", "clock_reset"),
    sq!("incorrect_init", "reset_polarity"),
    sq!("incorrect_init", "registers"),
    sq!("incorrect_init", "reset_values"),
    sq!("incorrect_init", "init_property_format"),
    sq!("incorrect_init", "init_sva"),
];

/// The manifest text and `(id, .sq text)` pairs of a shipped chain.
pub fn builtin_files(threat: ThreatId) -> (String, &'static [(&'static str, &'static str)]) {
    let files = match threat {
        ThreatId::UnusedStates => UNUSED_STATES,
        ThreatId::StateTransition => STATE_TRANSITION,
        ThreatId::InfoLeakage => INFO_LEAKAGE,
        ThreatId::IncorrectInit => INCORRECT_INIT,
    };
    let manifest = files.iter().map(|(id, _)| *id).collect::<alloc::vec::Vec<_>>().join("\n");
    (manifest, files)
}

/// A shipped chain, parsed and validated with `k` valid examples.
pub fn builtin_chain(threat: ThreatId, k: usize) -> ThreatChain {
    let (manifest, files) = builtin_files(threat);
    let lookup = |id: &str| files.iter().find(|(i, _)| *i == id).map(|(_, t)| String::from(*t));
    match load_chain(threat, &manifest, lookup, k) {
        Ok(c) => c,
        Err(e) => panic!("shipped chain {threat} is invalid: {e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::validate_chain;

    #[test]
    fn shipped_chain_sizes() {
        let sizes: alloc::vec::Vec<(ThreatId, usize)> =
            ThreatId::ALL.iter().map(|&t| (t, builtin_chain(t, 3).sub_questions.len())).collect();
        assert_eq!(
            sizes,
            [
                (ThreatId::UnusedStates, 9),
                (ThreatId::StateTransition, 12),
                (ThreatId::InfoLeakage, 10),
                (ThreatId::IncorrectInit, 7)
            ]
        );
    }

    #[test]
    fn shipped_chains_validate() {
        for t in ThreatId::ALL {
            let c = builtin_chain(t, 3);
            assert_eq!(validate_chain(&c, 3), []);
            assert!(c.sub_questions.last().unwrap().is_codegen);
        }
    }
}
