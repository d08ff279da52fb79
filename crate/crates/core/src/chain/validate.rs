use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::decompose::DESIGN_FACT_NAMES;
use super::ThreatChain;
use crate::prompt::{extract_info, AnswerStatus};

/// Placeholder every codegen question may use: the current asset's name.
pub const ASSET_PLACEHOLDER: &str = "asset";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDiagnostic {
    pub sub_question: String,
    pub message: String,
}

/// One diagnostic per violated chain invariant; empty when the chain is
/// well formed.
pub fn validate_chain(chain: &ThreatChain, k: usize) -> Vec<ChainDiagnostic> {
    let mut out = Vec::new();
    let mut diag = |sq: &str, message: String| out.push(ChainDiagnostic { sub_question: sq.into(), message });
    let n = chain.sub_questions.len();
    let producers: Vec<usize> =
        (0..n).filter(|&i| chain.sub_questions[i].is_asset_producer).collect();
    let mut exported: Vec<(&str, usize)> = Vec::new();
    for (i, sq) in chain.sub_questions.iter().enumerate() {
        if chain.sub_questions[..i].iter().any(|q| q.id == sq.id) {
            diag(&sq.id, format!("duplicate sub-question id '{}'", sq.id));
        }
        if sq.valid_examples.len() != k || k == 0 {
            diag(&sq.id, format!("expected {k} valid examples, found {}", sq.valid_examples.len()));
        }
        if sq.invalid_examples.len() != 1 {
            diag(&sq.id, format!("expected exactly 1 invalid example, found {}", sq.invalid_examples.len()));
        }
        if sq.is_codegen && i + 1 != n {
            diag(&sq.id, format!("codegen question at position {} of {n}; it must be last", i + 1));
        }
        if sq.is_codegen && sq.is_asset_producer {
            diag(&sq.id, "a question cannot both produce assets and generate code".into());
        }
        if sq.is_codegen && !producers.iter().any(|&p| p < i) {
            diag(&sq.id, "codegen question has no asset producer before it".into());
        }
        if sq.is_asset_producer && producers.first() != Some(&i) {
            diag(&sq.id, "more than one asset producer".into());
        }
        for c in &sq.carry_forward {
            if sq.field_kind(c).is_none() {
                diag(&sq.id, format!("carried field '{c}' is not in the extract schema"));
            }
        }
        for p in sq.placeholders() {
            if DESIGN_FACT_NAMES.contains(&p.as_str()) {
                continue;
            }
            if sq.is_codegen {
                let from_producer = producers
                    .first()
                    .is_some_and(|&pi| chain.sub_questions[pi].field_kind(&p).is_some());
                if p == ASSET_PLACEHOLDER || from_producer {
                    continue;
                }
            }
            if exported.iter().any(|(f, _)| *f == p) {
                continue;
            }
            let later = chain.sub_questions[i + 1..].iter().find(|q| q.carry_forward.contains(&p));
            match later {
                Some(q) => diag(&sq.id, format!("placeholder '{{{p}}}' is exported by later question '{}'", q.id)),
                None => diag(&sq.id, format!("unresolvable placeholder '{{{p}}}'")),
            }
        }
        for (e, ex) in sq.valid_examples.iter().enumerate() {
            let rec = extract_info(&sq.id, &ex.answer, &sq.extract_schema);
            if rec.status != AnswerStatus::Ok {
                diag(&sq.id, format!("valid example {} does not extract against the schema", e + 1));
            }
        }
        for ex in &sq.invalid_examples {
            let rec = extract_info(&sq.id, &ex.answer, &sq.extract_schema);
            if rec.status != AnswerStatus::InvalidInputDetected {
                diag(&sq.id, "invalid example answer must start with 'N/A'".into());
            }
        }
        for c in &sq.carry_forward {
            exported.push((c.as_str(), i));
        }
    }
    if let Some(first) = chain.sub_questions.first() {
        if producers.is_empty() {
            out.push(ChainDiagnostic { sub_question: first.id.clone(), message: "chain has no asset producer".into() });
        }
        let codegens = chain.sub_questions.iter().filter(|q| q.is_codegen).count();
        if codegens != 1 {
            out.push(ChainDiagnostic {
                sub_question: first.id.clone(),
                message: format!("chain needs exactly one codegen question, found {codegens}"),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::sq_text;
    use super::super::{parse_sub_question, SubQuestion, ThreatId};
    use super::*;

    fn chain(specs: &[(&str, &str, &str, &str, &str, usize)]) -> ThreatChain {
        let sub_questions: Vec<SubQuestion> = specs
            .iter()
            .enumerate()
            .map(|(i, (id, q, ex, carry, flags, inv))| {
                parse_sub_question(id, i + 1, &sq_text(q, ex, carry, flags, *inv)).unwrap()
            })
            .collect();
        ThreatChain { threat: ThreatId::UnusedStates, sub_questions }
    }

    const GOOD: [(&str, &str, &str, &str, &str, usize); 3] = [
        ("a", "{rtl}", "name:identifier", "name", "", 1),
        ("b", "{name}", "name:identifier", "", "asset_producer", 1),
        ("c", "{asset} {name}", "name:identifier", "", "codegen", 1),
    ];

    #[test]
    fn well_formed_chain_is_clean() {
        assert_eq!(validate_chain(&chain(&GOOD), 3), []);
    }

    #[test]
    fn two_invalid_examples_is_one_diagnostic() {
        let mut specs = GOOD;
        specs[1].5 = 2;
        let d = validate_chain(&chain(&specs), 3);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].sub_question, "b");
    }

    #[test]
    fn forward_reference_is_reported() {
        let specs = [
            ("a", "{rtl}", "name:identifier", "", "", 1),
            ("b", "{name}", "name:identifier", "", "asset_producer", 1),
            ("c", "x", "name:identifier", "name", "", 1),
            ("d", "{asset}", "name:identifier", "", "codegen", 1),
        ];
        let d = validate_chain(&chain(&specs), 3);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.contains("exported by later question 'c'"));
    }

    #[test]
    fn codegen_must_be_last() {
        let specs = [
            ("a", "{rtl}", "name:identifier", "", "asset_producer", 1),
            ("b", "x", "name:identifier", "", "codegen", 1),
            ("c", "x", "name:identifier", "", "", 1),
            ("d", "x", "name:identifier", "", "", 1),
            ("e", "x", "name:identifier", "", "", 1),
        ];
        let d = validate_chain(&chain(&specs), 3);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("position 2 of 5"));
    }
}
