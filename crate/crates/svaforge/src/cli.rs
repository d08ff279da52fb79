//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use svaforge_core::prompt::PromptConfig;
use svaforge_core::sofi::{emit_sofi_assertions, ByteOrder, SofiConfig, SofiProperty};
use svaforge_core::sva::lint_constants;

use crate::backends::{BackendDescriptor, BackendKind};
use crate::run::{evaluate, generate, validate, RunConfig};
use crate::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "svaforge", version, about = "Generate SystemVerilog security assertions from RTL by chained sub-questions")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    #[arg(long, global = true, value_enum, default_value = "oracle")]
    pub backend: BackendKind,
    /// Chat-completion URL for `--backend http`.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long, global = true)]
    pub auth_env: Option<String>,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub temperature: f64,
    /// Transcript to replay from.
    #[arg(long, global = true)]
    pub transcript: Option<PathBuf>,
    /// Append every backend round trip to this transcript.
    #[arg(long, global = true)]
    pub record: Option<PathBuf>,
    /// Directory of `<threat>/manifest` chains; the built-in chains otherwise.
    #[arg(long, global = true)]
    pub chains: Option<PathBuf>,
    /// Corpus manifest (`path<TAB>threats` per line).
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub repeats: Option<usize>,
    /// Omit timestamps so identical inputs give identical bytes.
    #[arg(long, global = true)]
    pub reproducible: bool,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Valid examples per prompt.
    #[arg(long, global = true, default_value_t = 3)]
    pub examples: usize,
    #[arg(long, global = true, default_value_t = 2)]
    pub max_retries: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write `<design>.<threat>.sva.sv` for every corpus cell.
    Generate {
        /// One file per design holding all of its threats.
        #[arg(long)]
        merge: bool,
    },
    /// Generate `--repeats` times, score and classify consistency.
    Evaluate,
    /// Check chains, corpus designs and prompt rendering.
    Validate,
    /// Emit AES round-key byte-range assertions.
    Sofi(SofiArgs),
    /// Repair malformed sized constants in an SVA file (`-` for stdin).
    Lint { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PropertyArg {
    #[value(name = "sp3.1")]
    Sp31,
    #[value(name = "sp3.2")]
    Sp32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Msb,
    Lsb,
}

#[derive(Debug, Args)]
pub struct SofiArgs {
    #[arg(long, value_enum)]
    pub property: PropertyArg,
    #[arg(long)]
    pub key_signal: String,
    #[arg(long)]
    pub ref_signal: String,
    #[arg(long, value_enum, default_value = "msb")]
    pub byte_order: OrderArg,
    #[arg(long, default_value_t = 9)]
    pub round: u32,
    #[arg(long, default_value = "round")]
    pub round_signal: String,
    #[arg(long, default_value = "clk")]
    pub clock: String,
}

impl Global {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            kind: self.backend,
            endpoint: self.endpoint.clone(),
            model_name: self.model.clone(),
            auth_env: self.auth_env.clone(),
            transcript_path: self.transcript.clone(),
            temperature: self.temperature,
        }
    }

    fn prompt(&self) -> PromptConfig {
        PromptConfig { k: self.examples, max_retries: self.max_retries, ..PromptConfig::default() }
    }

    fn run_config(&self, default_repeats: usize) -> Result<RunConfig, ConfigError> {
        let corpus = self.corpus.clone().ok_or_else(|| ConfigError::Usage("--corpus is required".into()))?;
        Ok(RunConfig {
            corpus,
            chains_dir: self.chains.clone(),
            backend: self.descriptor(),
            out: self.out.clone(),
            repeats: self.repeats.unwrap_or(default_repeats),
            reproducible: self.reproducible,
            jobs: self.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            merge: false,
            record: self.record.clone(),
            prompt: self.prompt(),
        })
    }
}

fn dispatch(cli: Cli) -> Result<i32, ConfigError> {
    let g = &cli.global;
    match cli.command {
        Command::Generate { merge } => {
            let mut cfg = g.run_config(1)?;
            cfg.merge = merge;
            let s = generate(&cfg)?;
            eprintln!("{} cells, {} failed, {} files written to {}", s.cells, s.failed, s.written.len(), cfg.out.display());
            Ok(s.exit_code())
        }
        Command::Evaluate => {
            let s = evaluate(&g.run_config(5)?)?;
            Ok(s.exit_code())
        }
        Command::Validate => {
            let diags = validate(g.chains.as_deref(), g.corpus.as_deref(), &g.prompt())?;
            for d in &diags {
                println!("{d}");
            }
            eprintln!("{} diagnostics", diags.len());
            Ok(i32::from(!diags.is_empty()))
        }
        Command::Sofi(a) => {
            let property = match a.property {
                PropertyArg::Sp31 => SofiProperty::Sp3_1,
                PropertyArg::Sp32 => SofiProperty::Sp3_2,
            };
            let cfg = SofiConfig {
                key_signal: a.key_signal,
                ref_signal: a.ref_signal,
                round_signal: a.round_signal,
                clock: a.clock,
                byte_order: match a.byte_order {
                    OrderArg::Msb => ByteOrder::MsbFirst,
                    OrderArg::Lsb => ByteOrder::LsbFirst,
                },
            };
            let snippets = emit_sofi_assertions(property, &cfg, a.round).map_err(|e| ConfigError::Usage(e.to_string()))?;
            let text: Vec<String> = snippets.iter().map(|s| s.serialize()).collect();
            println!("{}", text.join("\n\n"));
            Ok(0)
        }
        Command::Lint { file } => {
            let mut text = String::new();
            if file.as_os_str() == "-" {
                io::stdin().read_to_string(&mut text).map_err(|e| ConfigError::io(&file, e))?;
            } else {
                text = fs::read_to_string(&file).map_err(|e| ConfigError::io(&file, e))?;
            }
            let (fixed, repairs) = lint_constants(&text);
            for r in &repairs {
                eprintln!("{}:{}:{}: repaired {:?} in `{}`", file.display(), r.line, r.col, r.kind, r.original);
            }
            print!("{fixed}");
            Ok(0)
        }
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
