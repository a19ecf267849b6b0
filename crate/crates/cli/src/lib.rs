//! `setu` command-line interface.

pub mod commands;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "setu",
    version,
    about = "Duplicate crowdtesting report detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract features for every report of a corpus into a store.
    Featurize(FeaturizeArgs),
    /// Rank the candidates of one report.
    Query(QueryArgs),
    /// Compute retrieval metrics for a list of methods.
    Evaluate(EvaluateArgs),
    /// Compare two per-query dumps with the Mann-Whitney U test and Cliff's delta.
    Compare(CompareArgs),
    /// Leave-one-out threshold tuning.
    Tune(TuneArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub stopwords: PathBuf,
    #[arg(long)]
    pub synonyms: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub report: String,
    #[arg(long, default_value = "setu")]
    pub combiner: String,
    #[arg(long, default_value_t = commands::DEFAULT_THRES)]
    pub thres: f64,
    #[arg(long, default_value = "full")]
    pub mask: String,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Refuse stores whose embedding dimension differs.
    #[arg(long)]
    pub embedding_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Comma-separated method names; the first one is compared against the rest.
    #[arg(long, value_delimiter = ',', default_value = "setu,onlytext,onlyimage")]
    pub methods: Vec<String>,
    /// Threshold for setu and textfirst methods.
    #[arg(long, default_value_t = commands::DEFAULT_THRES)]
    pub thres: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Per-query dump of the proposed method.
    #[arg(long)]
    pub a: PathBuf,
    /// Per-query dump of the baseline.
    #[arg(long)]
    pub b: PathBuf,
    /// Output file; CSV when it ends in `.csv`, JSON otherwise.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Directory of `.store` files.
    #[arg(long)]
    pub stores: PathBuf,
    /// Project to hold out; every fold is run when omitted.
    #[arg(long)]
    pub holdout: Option<String>,
    #[arg(long, default_value_t = setu_core::evaluation::tuning::DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, default_value = "full")]
    pub mask: String,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seeds in the spec; project i gets seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Featurize(a) => commands::featurize(&a).map(|_| ()),
        Command::Query(a) => print_stdout(&commands::query(&a)?),
        Command::Evaluate(a) => commands::evaluate(&a).map(|_| ()),
        Command::Compare(a) => commands::compare(&a).map(|_| ()),
        Command::Tune(a) => {
            let json = commands::tune(&a)?;
            match &a.out {
                Some(path) => output::write_file(path, json.as_bytes()),
                None => print_stdout(&json),
            }
        }
        Command::Synth(a) => commands::synth(&a).map(|_| ()),
    }
}

/// Prints `text` to standard output. A closed pipe (e.g. `| head`) is not an
/// error.
fn print_stdout(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
