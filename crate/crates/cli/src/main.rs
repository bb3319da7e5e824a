mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Marks an error as a validation failure (bad input, config or usage),
/// which exits with status 1; everything else exits with 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Invalid(msg.into()))
}

#[derive(Parser, Debug)]
#[command(name = "pagewise", version, about = "Page-grounded long-document question answering")]
pub struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Single source of randomness for every command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-document sections (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GatewayFlags {
    /// Generation endpoint URL.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Mock script (JSONL of {role, prompt_hash, reply}); enables mock mode.
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Raw OCR page records → canonical document JSONL.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        gap_factor: Option<f64>,
        #[arg(long)]
        overlap_min: Option<f64>,
    },
    /// Tag documents with taxonomy labels and pick the largest clusters.
    Tag {
        #[arg(long)]
        corpus: PathBuf,
        /// JSONL of {id, vector}, one per document.
        #[arg(long)]
        embeddings: PathBuf,
        /// JSONL of {id, vector}, one per label.
        #[arg(long)]
        labels: PathBuf,
        /// JSON object label → parent label (null for top level).
        #[arg(long)]
        taxonomy: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        clusters: Option<usize>,
    },
    /// Balanced, disjoint train/test document draw.
    Sample {
        /// doc_meta.jsonl written by `tag`.
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        train_per_cluster: Option<usize>,
        #[arg(long)]
        test_per_cluster: Option<usize>,
    },
    /// Persona-driven multi-turn QA generation.
    GenQa {
        #[arg(long)]
        corpus: PathBuf,
        /// JSONL persona pool.
        #[arg(long)]
        personas: PathBuf,
        /// Optional doc_meta.jsonl assigning clusters.
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n_qa: Option<usize>,
        #[arg(long)]
        max_attempts: Option<usize>,
        #[arg(long)]
        personas_per_round: Option<usize>,
        #[command(flatten)]
        gateway: GatewayFlags,
    },
    /// Windowed QA examples, reiteration examples and their mix.
    BuildTrain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        dialogues: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// none | max | fixed:N
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        reiteration: Option<bool>,
        #[arg(long)]
        mix_ratio: Option<f64>,
        #[arg(long)]
        excerpt_tokens: Option<usize>,
    },
    /// Train the page finder encoder.
    TrainFinder {
        /// JSONL of {query, positive}.
        #[arg(long, conflicts_with = "dialogues")]
        pairs: Option<PathBuf>,
        /// Derive pairs from generated dialogues (needs --corpus).
        #[arg(long, requires = "corpus")]
        dialogues: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
    },
    /// Score predictions against references.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also report the embedding-based score via the gateway.
        #[arg(long)]
        bertscore: bool,
        #[command(flatten)]
        gateway: GatewayFlags,
    },
    /// HTTP API for grounded QA sessions.
    Serve {
        #[arg(long)]
        corpus: PathBuf,
        /// Encoder parameters from `train-finder`; a seeded random
        /// projection is used when absent.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        addr: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        gateway: GatewayFlags,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
