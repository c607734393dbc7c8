//! Command-line driver for the agreement probing pipeline.
//!
//! Stages exchange files only: `extract` writes instance records,
//! `stratify` adds heuristic profiles, `controls` derives variant sets,
//! `evaluate` scores them and `report` renders the result.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "agreement-probe", version, about = "Object past-participle agreement probes for French")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract agreement instances from CoNLL-U treebanks.
    Extract(ExtractArgs),
    /// Attach heuristic profiles and difficulty groups.
    Stratify(StratifyArgs),
    /// Generate nonce, mirror and permuted control sets.
    Controls(ControlsArgs),
    /// Score instance sets and write a stratified report.
    Evaluate(EvaluateArgs),
    /// Render a report as json, csv or a text table.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    /// CoNLL-U treebank files.
    #[arg(short, long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Instance records (JSON Lines).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Rejection log (JSON Lines).
    #[arg(long)]
    pub rejections: Option<PathBuf>,
    /// Corpus whose most frequent forms bound the vocabulary: CoNLL-U when
    /// the name ends in .conllu, otherwise whitespace-tokenized text.
    #[arg(long)]
    pub vocab_corpus: Vec<PathBuf>,
    #[arg(long, default_value_t = 50_000)]
    pub vocab_limit: usize,
    /// Also accept bare `acl` relative clauses with an object `que`.
    #[arg(long)]
    pub lenient: bool,
    /// Drop malformed sentences instead of failing.
    #[arg(long)]
    pub skip_malformed: bool,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TieArg {
    Sing,
    Abstain,
}

#[derive(Debug, Args, Serialize)]
pub struct StratifyArgs {
    #[arg(short, long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// How the majority heuristic treats equal counts.
    #[arg(long, value_enum, default_value_t = TieArg::Sing)]
    pub tie: TieArg,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Original,
    Nonce,
    Mirror,
    Permuted,
}

#[derive(Debug, Args, Serialize)]
pub struct ControlsArgs {
    /// Stratified original instances.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Treebanks for the substitution lexicon (default: the instances'
    /// own sentences).
    #[arg(long)]
    pub treebank: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [VariantArg::Nonce, VariantArg::Mirror, VariantArg::Permuted])]
    pub variants: Vec<VariantArg>,
    /// Required for nonce and permuted sets.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Nonce sentences per original.
    #[arg(long, default_value_t = 3)]
    pub nonce_count: usize,
    #[arg(long)]
    pub skip_malformed: bool,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Stratified instance files; variants are reported separately.
    #[arg(short, long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Report (JSON).
    #[arg(short, long)]
    pub output: PathBuf,
    /// oracle, anti-oracle, constant-sing, constant-plur, h1-h4, ngram,
    /// uniform or external.
    #[arg(long)]
    pub scorer: String,
    /// Training corpus for ngram/uniform: CoNLL-U when the name ends in
    /// .conllu, otherwise whitespace-tokenized text.
    #[arg(long)]
    pub train: Vec<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 50_000)]
    pub vocab_limit: usize,
    /// Command line of an external scorer (split on whitespace).
    #[arg(long)]
    pub command: Option<String>,
    /// Seconds to wait for each line from an external scorer.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, value_enum, default_value_t = TieArg::Sing)]
    pub tie: TieArg,
    /// Per-instance verdicts (JSON Lines).
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
    /// Seed recorded in the report; not used for scoring.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Report written by `evaluate`.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Defaults to standard output (no manifest is written then).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Protocol(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Protocol(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level)),
        )
        .init();

    let result = match &cli.command {
        Command::Extract(a) => commands::extract(a),
        Command::Stratify(a) => commands::stratify(a),
        Command::Controls(a) => commands::controls(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Data(e) => eprintln!("error: {e:#}"),
                Failure::Protocol(m) => eprintln!("scorer error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
