//! One (design, threat) cell: decompose, walk the chain, generate per
//! asset, lint and collect snippets.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::backend::Backend;
use crate::chain::{decompose, AssetInfo, BoundQuestion, DecomposeError, FieldKind, ThreatChain, ThreatId};
use crate::diag::Diagnostic;
use crate::prompt::{run_sub_question, AnswerRecord, AnswerStatus, PromptBundle, PromptConfig, PromptError};
use crate::sva::{
    find_candidates, lint_constants, parse_snippet, reorganize_with_rejected, FileHeader, RejectedSnippet,
    ReorganizeError, SvaFile, TaggedSnippet,
};
use crate::verilog::DesignModel;

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutput {
    pub threat: ThreatId,
    pub module: String,
    pub answers: Vec<AnswerRecord>,
    /// Every prompt sent, retries included, in order.
    pub prompts: Vec<PromptBundle>,
    pub assets: Vec<AssetInfo>,
    pub snippets: Vec<TaggedSnippet>,
    pub rejected: Vec<RejectedSnippet>,
    pub codegen_calls: usize,
    pub lint_repairs: usize,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CellError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("InvalidInputDetected: sub-question '{0}' reported that the design lacks what it asks for")]
    InvalidInput(String),
    #[error("chain for {0} has no codegen question")]
    NoCodegen(ThreatId),
    #[error(transparent)]
    Reorganize(#[from] ReorganizeError),
}

fn set_carried(carried: &mut Vec<(String, String)>, field: &str, value: String) {
    carried.retain(|(k, _)| k != field);
    carried.push((field.to_string(), value));
}

fn assets_from(rec: &AnswerRecord, q: &BoundQuestion, threat: ThreatId, module: &str) -> Vec<AssetInfo> {
    let Some((first, _)) = q.sq.extract_schema.first() else { return Vec::new() };
    let payload: alloc::collections::BTreeMap<String, String> = q
        .sq
        .extract_schema
        .iter()
        .skip(1)
        .filter_map(|(f, _)| rec.extracted.get(f).map(|v| (f.clone(), v.render())))
        .collect();
    let mut names: Vec<String> = Vec::new();
    for item in rec.extracted.get(first).map(|v| v.items()).unwrap_or_default() {
        if !names.contains(&item) {
            names.push(item);
        }
    }
    names
        .into_iter()
        .map(|name| AssetInfo { threat, module: module.into(), name, payload: payload.clone() })
        .collect()
}

/// Runs one chain against the design's top module.
pub fn run_cell(
    design: &DesignModel,
    chain: &ThreatChain,
    backend: &dyn Backend,
    cfg: &PromptConfig,
    extra_sensitive: &[String],
) -> Result<CellOutput, CellError> {
    let bound = decompose(design, chain, extra_sensitive)?;
    let threat = chain.threat;
    let mut out = CellOutput {
        threat,
        module: bound.module.clone(),
        answers: Vec::new(),
        prompts: Vec::new(),
        assets: Vec::new(),
        snippets: Vec::new(),
        rejected: Vec::new(),
        codegen_calls: 0,
        lint_repairs: 0,
        diagnostics: Vec::new(),
    };
    let mut carried: Vec<(String, String)> = Vec::new();
    let mut codegen = None;
    for q in &bound.questions {
        if q.sq.is_codegen {
            codegen = Some(q);
            continue;
        }
        let (rec, prompts) = run_sub_question(q, &carried, &[], backend, cfg)?;
        out.prompts.extend(prompts);
        match rec.status {
            AnswerStatus::InvalidInputDetected if q.sq.is_asset_producer => {
                out.diagnostics.push(Diagnostic::note(1, format!("'{}' found no assets", q.sq.id)));
            }
            AnswerStatus::InvalidInputDetected => return Err(CellError::InvalidInput(q.sq.id.clone())),
            _ => {
                if q.sq.is_asset_producer {
                    out.assets = assets_from(&rec, q, threat, &bound.module);
                }
                for f in &q.sq.carry_forward {
                    if let Some(v) = rec.extracted.get(f) {
                        set_carried(&mut carried, f, v.render());
                    }
                }
            }
        }
        out.answers.push(rec);
    }
    let q = codegen.ok_or(CellError::NoCodegen(threat))?;
    let code_field =
        q.sq.extract_schema.iter().find(|(_, k)| *k == FieldKind::CodeBlock).map(|(f, _)| f.clone());
    for asset in &out.assets.clone() {
        let mut extra: Vec<(String, String)> = asset.payload.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        extra.push(("asset".into(), asset.name.clone()));
        out.codegen_calls += 1;
        let (rec, prompts) = run_sub_question(q, &carried, &extra, backend, cfg)?;
        out.prompts.extend(prompts);
        if rec.status == AnswerStatus::InvalidInputDetected {
            out.diagnostics.push(Diagnostic::warning(1, format!("codegen declined asset '{}'", asset.name)));
            out.answers.push(rec);
            continue;
        }
        let raw = code_field.as_ref().and_then(|f| rec.extracted.get(f)).map(|v| v.render()).unwrap_or_default();
        out.answers.push(rec);
        let (fixed, repairs) = lint_constants(&raw);
        out.lint_repairs += repairs.len();
        let candidates = find_candidates(&fixed);
        if candidates.is_empty() {
            out.rejected.push(RejectedSnippet { threat: threat.id().into(), asset: asset.name.clone(), text: fixed });
            continue;
        }
        for c in candidates {
            match parse_snippet(c.text) {
                Ok(snippet) => out.snippets.push(TaggedSnippet {
                    threat: threat.id().into(),
                    asset: asset.name.clone(),
                    snippet,
                    source: c.text.to_string(),
                }),
                Err(e) => {
                    out.diagnostics.push(Diagnostic::warning(
                        c.line + e.line - 1,
                        format!("snippet for asset '{}' does not parse: {e}", asset.name),
                    ));
                    out.rejected.push(RejectedSnippet {
                        threat: threat.id().into(),
                        asset: asset.name.clone(),
                        text: c.text.to_string(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Assembles a cell's snippets into the checker file.
pub fn render_cell(design: &DesignModel, cell: &CellOutput, timestamp: Option<String>) -> Result<SvaFile, CellError> {
    let header = FileHeader {
        design: design.top().name.clone(),
        threats: alloc::vec![cell.threat.id().to_string()],
        timestamp,
    };
    Ok(reorganize_with_rejected(cell.snippets.clone(), cell.rejected.clone(), design.top(), &header)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendError, OracleBackend};
    use crate::chain::builtin_chain;
    use crate::eval::{golden_assets, score};
    use crate::sva::check_syntax;
    use crate::verilog::parse_design;

    const FSM: &str = "module fsm(input clk, input rst, input in, output reg out);
  localparam S0 = 2'b00, S1 = 2'b01, S2 = 2'b10;
  reg [1:0] state, next;
  always @(posedge clk or posedge rst) if (rst) state <= S0; else state <= next;
  always @(*) begin
    next = state;
    case (state)
      S0: if (in) next = S1;
      S1: next = S2;
      S2: next = S0;
    endcase
  end
  always @(posedge clk) out <= (state == S2);
endmodule";

    #[test]
    fn oracle_cells_score_full_marks() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let oracle = OracleBackend::for_design(&d, &[]);
        for t in [ThreatId::UnusedStates, ThreatId::StateTransition, ThreatId::IncorrectInit] {
            let cell = run_cell(&d, &builtin_chain(t, 3), &oracle, &PromptConfig::default(), &[]).unwrap();
            let file = render_cell(&d, &cell, None).unwrap();
            assert_eq!(check_syntax(&file.text).score, 100.0, "{t}");
            let g = golden_assets(d.top(), t, &[]);
            let r = score("fsm", t, "oracle", &file.text, &g, d.top());
            assert_eq!((r.functionality, r.matched_assets), (100.0, g.len()), "{t}\n{}", file.text);
            assert!(cell.answers.iter().all(|a| a.attempts == 1));
        }
    }

    #[test]
    fn one_codegen_call_per_unused_state() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let oracle = OracleBackend::for_design(&d, &[]);
        let cell = run_cell(&d, &builtin_chain(ThreatId::UnusedStates, 3), &oracle, &PromptConfig::default(), &[]).unwrap();
        assert_eq!(cell.codegen_calls, 1);
        assert_eq!(cell.assets[0].name, "2'b11");
    }

    #[test]
    fn missing_fsm_is_a_decompose_error() {
        let d = parse_design("module c(input a, output y); assign y = a; endmodule", None, "c.v").unwrap();
        let oracle = OracleBackend::for_design(&d, &[]);
        let e = run_cell(&d, &builtin_chain(ThreatId::StateTransition, 3), &oracle, &PromptConfig::default(), &[]);
        assert_eq!(e.unwrap_err(), CellError::Decompose(DecomposeError::MissingDesignFact("fsm".into())));
    }

    struct Malformed;
    impl Backend for Malformed {
        fn submit(&self, _: &PromptBundle) -> Result<String, BackendError> {
            Ok("I think the module is called fsm.".into())
        }
    }

    #[test]
    fn free_text_exhausts_retries() {
        let d = parse_design(FSM, None, "fsm.v").unwrap();
        let e = run_cell(&d, &builtin_chain(ThreatId::UnusedStates, 3), &Malformed, &PromptConfig::default(), &[]);
        assert!(matches!(e, Err(CellError::Prompt(PromptError::ExtractionExhausted { attempts: 3, .. }))));
    }
}
