use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use svaforge::{load_transcript, ReplayBackend, TranscriptEntry};
use svaforge_core::backend::BackendError;
use svaforge_core::chain::{builtin_chain, decompose};
use svaforge_core::prompt::{render, run_sub_question, AnswerStatus, PromptError};
use svaforge_core::{parse_design, run_cell, OracleBackend, PromptConfig, ThreatId};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn svaforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svaforge")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_design_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(&m, "nope.v\tunused_states\n").unwrap();
    let out = svaforge(&["generate", "--corpus", s(&m), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn design_without_fsm_fails_only_its_cell() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(corpus_dir().join("aes_key_store.v"), dir.path().join("aes_key_store.v")).unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(&m, "aes_key_store.v\tstate_transition,incorrect_init\n").unwrap();
    let o = dir.path().join("o");
    let out = svaforge(&["generate", "--corpus", s(&m), "--out", s(&o), "--reproducible"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MissingDesignFact(fsm)"));
    assert!(o.join("aes_key_store.incorrect_init.sva.sv").is_file());
    assert!(!o.join("aes_key_store.state_transition.sva.sv").exists());
}

#[test]
fn validate_shipped_chains_and_corpus() {
    let out = svaforge(&["validate", "--corpus", s(&corpus_dir().join("manifest.tsv"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn validate_reports_unresolvable_placeholder() {
    let dir = tempfile::tempdir().unwrap();
    let tdir = dir.path().join("incorrect_init");
    fs::create_dir_all(&tdir).unwrap();
    let (manifest, files) = svaforge_core::chain::builtin_files(ThreatId::IncorrectInit);
    fs::write(tdir.join("manifest"), manifest).unwrap();
    for (id, text) in files {
        let text = if *id == "registers" { text.replace("---QUESTION---\n", "---QUESTION---\nUsing {mystery_field},\n") } else { text.to_string() };
        fs::write(tdir.join(format!("{id}.sq")), text).unwrap();
    }
    let out = svaforge(&["validate", "--chains", s(dir.path())]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout.lines().count(), 1, "{stdout}");
    assert!(stdout.contains("mystery_field"), "{stdout}");
}

#[test]
fn validate_reports_parse_error_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.v"), "module bad(input clk);\n  always @(posedge clk) x <= ;\nendmodule\n").unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(&m, "bad.v\tincorrect_init\n").unwrap();
    let out = svaforge(&["validate", "--corpus", s(&m)]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout.contains("bad.v:2:"), "{stdout}");
}

#[test]
fn evaluate_with_one_repeat_skips_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(&m, format!("{}\tunused_states\n", s(&corpus_dir().join("arbiter.v")))).unwrap();
    let o = dir.path().join("o");
    let out = svaforge(&["evaluate", "--corpus", s(&m), "--out", s(&o), "--repeats", "1", "--reproducible"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
    assert_eq!(fs::read_to_string(o.join("consistency.csv")).unwrap().lines().count(), 1);
    assert_eq!(fs::read_to_string(o.join("scores.csv")).unwrap().lines().count(), 2);
}

#[test]
fn empty_corpus_reports_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(&m, "# no designs\n").unwrap();
    let o = dir.path().join("o");
    let out = svaforge(&["evaluate", "--corpus", s(&m), "--out", s(&o), "--repeats", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lists no designs"));
    assert_eq!(fs::read_to_string(o.join("scores.csv")).unwrap().lines().count(), 1);
}

#[test]
fn info_questions_precede_codegen_in_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(&m, format!("{}\tunused_states\n", s(&corpus_dir().join("uart_tx.v")))).unwrap();
    let t = dir.path().join("t.jsonl");
    let out = svaforge(&["generate", "--corpus", s(&m), "--out", s(&dir.path().join("o")), "--record", s(&t), "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let entries = load_transcript(&t).unwrap();
    let codegen: Vec<bool> = entries.iter().map(|e| e.answer_text.starts_with("sva:")).collect();
    let first = codegen.iter().position(|c| *c).unwrap();
    assert!(codegen[first..].iter().all(|c| *c));
    // 3 unused encodings of a 3-bit register with 5 states
    assert_eq!(codegen.len() - first, 3);
    assert_eq!(first, 8);
}

#[test]
fn merge_writes_one_file_per_design() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(&m, format!("{}\tunused_states,incorrect_init\n", s(&corpus_dir().join("arbiter.v")))).unwrap();
    let o = dir.path().join("o");
    assert_eq!(svaforge(&["generate", "--merge", "--corpus", s(&m), "--out", s(&o), "--reproducible"]).status.code(), Some(0));
    let text = fs::read_to_string(o.join("arbiter.sva.sv")).unwrap();
    assert!(text.contains("// threats: unused_states, incorrect_init\n"), "{text}");
    assert!(text.contains("unused_state_state_3") && text.contains("init_gnt0"), "{text}");
    assert_eq!(svaforge_core::sva::check_syntax(&text).score, 100.0);
    assert_eq!(fs::read_dir(&o).unwrap().count(), 1);
}

#[test]
fn sofi_and_lint_subcommands() {
    let out = svaforge(&["sofi", "--property", "sp3.1", "--key-signal", "rk", "--ref-signal", "rk_ref"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).matches("endproperty").count(), 7);
    let out = svaforge(&["sofi", "--property", "sp3.2", "--key-signal", "rk", "--ref-signal", "rk_ref", "--round", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UnsupportedRound(5)"));

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("a.sv");
    fs::write(&f, "property p;\n  @(posedge m.clk) m.s != 3'b001';\nendproperty\nassert_p: assert property(p);\n").unwrap();
    let out = svaforge(&["lint", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("m.s != 3'b001;"));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn oracle_answers_extract_first_time_on_corpus() {
    for entry in svaforge::load_corpus(&corpus_dir().join("manifest.tsv")).unwrap() {
        let d = entry.parse().unwrap();
        let oracle = OracleBackend::for_design(&d, &entry.extra_sensitive);
        for t in &entry.threats {
            let cell = run_cell(&d, &builtin_chain(*t, 3), &oracle, &PromptConfig::default(), &entry.extra_sensitive).unwrap();
            assert!(!cell.assets.is_empty(), "{} {t}", entry.name);
            assert_eq!(cell.codegen_calls, cell.assets.len());
            for a in &cell.answers {
                assert_eq!((a.status, a.attempts), (AnswerStatus::Ok, 1), "{} {t} {}", entry.name, a.sub_question_id);
            }
        }
    }
}

#[test]
fn replay_retry_then_underrun() {
    let src = fs::read_to_string(corpus_dir().join("traffic_light.v")).unwrap();
    let d = parse_design(&src, None, "traffic_light.v").unwrap();
    let bound = decompose(&d, &builtin_chain(ThreatId::UnusedStates, 3), &[]).unwrap();
    let q = &bound.questions[0];
    let cfg = PromptConfig::default();
    let first = render(q, &[], &[], &cfg, false).unwrap();
    let retry = render(q, &[], &[], &cfg, true).unwrap();
    let ts = "2026-01-01T00:00:00Z".to_string();
    let replay = ReplayBackend::new(vec![
        TranscriptEntry::new(&first.rendered_text, "The module is traffic_light.", ts.clone()),
        TranscriptEntry::new(&retry.rendered_text, "module: traffic_light", ts),
    ])
    .strict();
    let (rec, prompts) = run_sub_question(q, &[], &[], &replay, &cfg).unwrap();
    assert_eq!((rec.status, rec.attempts, prompts.len()), (AnswerStatus::Ok, 2, 2));

    let empty = ReplayBackend::new(Vec::new());
    assert_eq!(
        run_sub_question(q, &[], &[], &empty, &cfg).unwrap_err(),
        PromptError::Backend(BackendError::Failed("transcript underrun".into()))
    );
}
