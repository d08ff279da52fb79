//! The designs x threats loop: generate, evaluate and validate.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use svaforge_core::chain::decompose;
use svaforge_core::eval::{classify_consistency, golden_assets, score, summary_table, Consistency, ScoreReport};
use svaforge_core::pipeline::render_cell;
use svaforge_core::prompt::render;
use svaforge_core::sva::{reorganize_with_rejected, FileHeader, SvaFile};
use svaforge_core::verilog::DesignModel;
use svaforge_core::{run_cell, Backend, OracleBackend, PromptConfig, ThreatChain, ThreatId};

use crate::backends::{BackendDescriptor, BackendKind, HttpBackend, RecordingBackend, ReplayBackend};
use crate::chains::{check_chain, load_chains};
use crate::corpus::{load_corpus, CorpusEntry};
use crate::transcript::{load_transcript, now_rfc3339, TranscriptWriter};
use crate::ConfigError;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub chains_dir: Option<PathBuf>,
    pub backend: BackendDescriptor,
    pub out: PathBuf,
    pub repeats: usize,
    pub reproducible: bool,
    pub jobs: usize,
    /// One file per design instead of per (design, threat).
    pub merge: bool,
    /// Append every round trip to this transcript.
    pub record: Option<PathBuf>,
    pub prompt: PromptConfig,
}

impl RunConfig {
    pub fn new(corpus: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            corpus: corpus.into(),
            chains_dir: None,
            backend: BackendDescriptor::oracle(),
            out: out.into(),
            repeats: 1,
            reproducible: true,
            jobs: 1,
            merge: false,
            record: None,
            prompt: PromptConfig::default(),
        }
    }
}

/// Loaded, read-only inputs shared by all workers.
#[derive(Debug)]
struct Workspace {
    entries: Vec<CorpusEntry>,
    designs: Vec<Result<DesignModel, String>>,
    chains: BTreeMap<ThreatId, ThreatChain>,
}

impl Workspace {
    fn load(cfg: &RunConfig) -> Result<Self, ConfigError> {
        if cfg.repeats == 0 || cfg.jobs == 0 {
            return Err(ConfigError::Usage("--repeats and --jobs must be at least 1".into()));
        }
        cfg.backend.validate()?;
        let entries = load_corpus(&cfg.corpus)?;
        let threats = entries.iter().flat_map(|e| e.threats.iter().copied());
        let chains = load_chains(cfg.chains_dir.as_deref(), threats, cfg.prompt.k)?;
        let designs = entries.iter().map(|e| e.parse().map_err(|e| e.to_string())).collect();
        Ok(Workspace { entries, designs, chains })
    }

    fn cells(&self) -> Vec<(usize, ThreatId)> {
        self.entries.iter().enumerate().flat_map(|(i, e)| e.threats.iter().map(move |t| (i, *t))).collect()
    }
}

enum Source {
    Oracle,
    Shared(Arc<dyn Backend>),
}

struct Backends {
    source: Source,
    recorder: Option<Arc<TranscriptWriter>>,
}

impl Backends {
    fn new(cfg: &RunConfig) -> Result<Self, ConfigError> {
        let source = match cfg.backend.kind {
            BackendKind::Oracle => Source::Oracle,
            BackendKind::Http => Source::Shared(Arc::new(HttpBackend::new(&cfg.backend)?)),
            BackendKind::Replay => {
                let path = cfg.backend.transcript_path.as_deref().unwrap_or(Path::new(""));
                Source::Shared(Arc::new(ReplayBackend::new(load_transcript(path)?)))
            }
        };
        let recorder = match &cfg.record {
            Some(p) => Some(Arc::new(TranscriptWriter::open(p)?)),
            None => None,
        };
        Ok(Backends { source, recorder })
    }

    fn for_design(&self, design: &DesignModel, extra: &[String]) -> Box<dyn Backend> {
        let inner: Box<dyn Backend> = match &self.source {
            Source::Oracle => Box::new(OracleBackend::for_design(design, extra)),
            Source::Shared(b) => Box::new(Arc::clone(b)),
        };
        match &self.recorder {
            Some(w) => Box::new(RecordingBackend::new(inner, Arc::clone(w))),
            None => inner,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub design: String,
    pub threat: ThreatId,
    /// The emitted file, or the error that stopped the cell.
    pub outcome: Result<CellFile, String>,
}

#[derive(Debug, Clone)]
pub struct CellFile {
    pub file: SvaFile,
    pub codegen_calls: usize,
    pub asset_count: usize,
}

fn run_matrix_once(ws: &Workspace, cfg: &RunConfig, backends: &Backends, timestamp: &Option<String>) -> Vec<CellResult> {
    let cells = ws.cells();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CellResult>>> = Mutex::new(vec![None; cells.len()]);
    let workers = cfg.jobs.min(cells.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(d, threat)) = cells.get(i) else { break };
                let entry = &ws.entries[d];
                let outcome = match &ws.designs[d] {
                    Err(e) => Err(e.clone()),
                    Ok(design) => {
                        let backend = backends.for_design(design, &entry.extra_sensitive);
                        run_cell(design, &ws.chains[&threat], &*backend, &cfg.prompt, &entry.extra_sensitive)
                            .and_then(|c| {
                                let file = render_cell(design, &c, timestamp.clone())?;
                                Ok(CellFile { file, codegen_calls: c.codegen_calls, asset_count: c.assets.len() })
                            })
                            .map_err(|e| e.to_string())
                    }
                };
                let r = CellResult { design: entry.name.clone(), threat, outcome };
                results.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap_or_else(|p| p.into_inner()).into_iter().flatten().collect()
}

pub fn output_name(design: &str, threat: ThreatId) -> String {
    format!("{design}.{threat}.sva.sv")
}

fn write_outputs(
    ws: &Workspace,
    dir: &Path,
    results: &[CellResult],
    merge: bool,
    timestamp: &Option<String>,
) -> Result<Vec<PathBuf>, ConfigError> {
    fs::create_dir_all(dir).map_err(|e| ConfigError::io(dir, e))?;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    if merge {
        for (d, entry) in ws.entries.iter().enumerate() {
            let Ok(design) = &ws.designs[d] else { continue };
            let ok: Vec<&CellResult> = results.iter().filter(|r| r.design == entry.name && r.outcome.is_ok()).collect();
            if ok.is_empty() {
                continue;
            }
            let header = FileHeader {
                design: design.top().name.clone(),
                threats: ok.iter().map(|r| r.threat.id().to_string()).collect(),
                timestamp: timestamp.clone(),
            };
            let (mut snippets, mut rejected) = (Vec::new(), Vec::new());
            for r in &ok {
                let f = &r.outcome.as_ref().expect("filtered").file;
                snippets.extend(f.snippets.iter().cloned());
                rejected.extend(f.rejected.iter().cloned());
            }
            match reorganize_with_rejected(snippets, rejected, design.top(), &header) {
                Ok(f) => files.push((dir.join(format!("{}.sva.sv", entry.name)), f.text)),
                Err(e) => eprintln!("error: {}: merge failed: {e}", entry.name),
            }
        }
    } else {
        for r in results {
            if let Ok(c) = &r.outcome {
                files.push((dir.join(output_name(&r.design, r.threat)), c.file.text.clone()));
            }
        }
    }
    let mut written = Vec::new();
    for (p, text) in files {
        fs::write(&p, text).map_err(|e| ConfigError::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}

fn report_failures(results: &[CellResult]) -> usize {
    let mut n = 0;
    for r in results {
        if let Err(e) = &r.outcome {
            eprintln!("error: {} / {}: {e}", r.design, r.threat);
            n += 1;
        }
    }
    n
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub cells: usize,
    pub failed: usize,
    pub written: Vec<PathBuf>,
    pub scores: Vec<ScoreReport>,
    pub consistency: Vec<(String, ThreatId, Consistency)>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed > 0)
    }
}

fn timestamp(cfg: &RunConfig) -> Option<String> {
    (!cfg.reproducible).then(now_rfc3339)
}

/// Writes `<out>/<design>.<threat>.sva.sv` for every applicable cell.
pub fn generate(cfg: &RunConfig) -> Result<RunSummary, ConfigError> {
    let ws = Workspace::load(cfg)?;
    if ws.entries.is_empty() {
        eprintln!("note: corpus {} lists no designs", cfg.corpus.display());
    }
    let backends = Backends::new(cfg)?;
    let ts = timestamp(cfg);
    let results = run_matrix_once(&ws, cfg, &backends, &ts);
    let written = write_outputs(&ws, &cfg.out, &results, cfg.merge, &ts)?;
    let failed = report_failures(&results);
    Ok(RunSummary { cells: results.len(), failed, written, ..Default::default() })
}

fn mean_report(runs: &[ScoreReport]) -> ScoreReport {
    let n = runs.len() as f64;
    let mut r = runs[0].clone();
    r.functionality = runs.iter().map(|s| s.functionality).sum::<f64>() / n;
    r.syntax = runs.iter().map(|s| s.syntax).sum::<f64>() / n;
    r
}

/// Runs the matrix `repeats` times into `<out>/run<i>/`, scores every
/// file against the oracle golden assets and classifies run-to-run
/// consistency. Writes `scores.csv`, `consistency.csv` and `summary.txt`.
pub fn evaluate(cfg: &RunConfig) -> Result<RunSummary, ConfigError> {
    let ws = Workspace::load(cfg)?;
    if ws.entries.is_empty() {
        eprintln!("note: corpus {} lists no designs", cfg.corpus.display());
    }
    let backends = Backends::new(cfg)?;
    let cells = ws.cells();
    let mut texts: Vec<Vec<Option<String>>> = vec![Vec::new(); cells.len()];
    let mut per_run: Vec<Vec<ScoreReport>> = vec![Vec::new(); cells.len()];
    let mut summary = RunSummary { cells: cells.len(), ..Default::default() };
    let mut failed_cells = vec![false; cells.len()];
    let label = cfg.backend.label();
    for run in 0..cfg.repeats {
        let ts = timestamp(cfg);
        let results = run_matrix_once(&ws, cfg, &backends, &ts);
        let dir = cfg.out.join(format!("run{}", run + 1));
        summary.written.extend(write_outputs(&ws, &dir, &results, false, &ts)?);
        report_failures(&results);
        for (i, r) in results.iter().enumerate() {
            let (d, threat) = cells[i];
            match (&r.outcome, &ws.designs[d]) {
                (Ok(c), Ok(design)) => {
                    let golden = golden_assets(design.top(), threat, &ws.entries[d].extra_sensitive);
                    per_run[i].push(score(&r.design, threat, &label, &c.file.text, &golden, design.top()));
                    texts[i].push(Some(c.file.text.clone()));
                }
                _ => {
                    failed_cells[i] = true;
                    texts[i].push(None);
                }
            }
        }
    }
    summary.failed = failed_cells.iter().filter(|f| **f).count();
    fs::create_dir_all(&cfg.out).map_err(|e| ConfigError::io(&cfg.out, e))?;

    let scores_path = cfg.out.join("scores.csv");
    let mut w = csv::Writer::from_path(&scores_path).map_err(|e| ConfigError::Usage(e.to_string()))?;
    let csv_err = |e: csv::Error| ConfigError::Usage(format!("{}: {e}", scores_path.display()));
    w.write_record(["design", "threat", "backend", "run", "functionality", "syntax", "expected_assets", "matched_assets", "snippets"])
        .map_err(csv_err)?;
    for reports in &per_run {
        for (run, s) in reports.iter().enumerate() {
            w.write_record([
                s.design.clone(),
                s.threat.to_string(),
                s.backend.clone(),
                (run + 1).to_string(),
                format!("{:.2}", s.functionality),
                format!("{:.2}", s.syntax),
                s.expected_assets.to_string(),
                s.matched_assets.to_string(),
                s.snippet_count.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| ConfigError::io(&scores_path, e))?;

    let cons_path = cfg.out.join("consistency.csv");
    let mut w = csv::Writer::from_path(&cons_path).map_err(|e| ConfigError::Usage(e.to_string()))?;
    w.write_record(["design", "threat", "runs", "classification"]).map_err(csv_err)?;
    if cfg.repeats < 2 {
        eprintln!("note: consistency needs --repeats >= 2; skipped");
    }
    for (i, &(d, threat)) in cells.iter().enumerate() {
        let name = &ws.entries[d].name;
        if cfg.repeats < 2 {
            break;
        }
        let class = if failed_cells[i] {
            "failed".to_string()
        } else {
            let outs: Vec<String> = texts[i].iter().flatten().cloned().collect();
            let rep = classify_consistency(name, &outs).expect("at least two runs");
            summary.consistency.push((name.clone(), threat, rep.classification));
            rep.classification.to_string()
        };
        w.write_record([name.clone(), threat.to_string(), cfg.repeats.to_string(), class]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| ConfigError::io(&cons_path, e))?;

    summary.scores = per_run.iter().filter(|r| !r.is_empty()).map(|r| mean_report(r)).collect();
    let table = summary_table(&summary.scores, &summary.consistency);
    let table_path = cfg.out.join("summary.txt");
    fs::write(&table_path, &table).map_err(|e| ConfigError::io(&table_path, e))?;
    print!("{table}");
    Ok(summary)
}

/// Validates chains, parses every corpus design and dry-renders every
/// sub-question against each applicable design. Returns the diagnostics.
pub fn validate(chains_dir: Option<&Path>, corpus: Option<&Path>, cfg: &PromptConfig) -> Result<Vec<String>, ConfigError> {
    let mut diags = Vec::new();
    let mut chains = BTreeMap::new();
    for t in ThreatId::ALL {
        let (chain, d) = check_chain(chains_dir, t, cfg.k)?;
        diags.extend(d);
        if let Some(c) = chain {
            chains.insert(t, c);
        }
    }
    let Some(corpus) = corpus else { return Ok(diags) };
    for entry in load_corpus(corpus)? {
        let design = match entry.parse() {
            Ok(d) => d,
            Err(e) => {
                diags.push(e.to_string());
                continue;
            }
        };
        let path = entry.path.display().to_string();
        diags.extend(design.all_diagnostics().iter().filter(|d| d.level != svaforge_core::Level::Note).map(|d| d.render(&path)));
        for t in &entry.threats {
            let Some(chain) = chains.get(t) else { continue };
            match decompose(&design, chain, &entry.extra_sensitive) {
                Err(e) => diags.push(format!("{path}: {t}: {e}")),
                Ok(bound) => diags.extend(dry_render(&bound.questions, cfg).into_iter().map(|m| format!("{path}: {t}/{m}"))),
            }
        }
    }
    Ok(diags)
}

fn dry_render(questions: &[svaforge_core::chain::BoundQuestion], cfg: &PromptConfig) -> Vec<String> {
    let mut carried: Vec<(String, String)> = Vec::new();
    let mut extra: Vec<(String, String)> = vec![("asset".into(), "<asset>".into())];
    let mut out = Vec::new();
    for q in questions {
        let ex: &[(String, String)] = if q.sq.is_codegen { &extra } else { &[] };
        if let Err(e) = render(q, &carried, ex, cfg, false) {
            out.push(format!("{}: {e}", q.sq.id));
        }
        if q.sq.is_asset_producer {
            extra.extend(q.sq.extract_schema.iter().skip(1).map(|(f, _)| (f.clone(), format!("<{f}>"))));
        }
        for f in &q.sq.carry_forward {
            carried.retain(|(k, _)| k != f);
            carried.push((f.clone(), format!("<{f}>")));
        }
    }
    out
}
