use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mcsa_core::Mode;

mod commands;
mod config;

#[derive(Debug, Parser)]
#[command(
    name = "mcsa",
    version,
    about = "Concept-space categorization and personalized search"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true, env = "MCSA_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the term vector database from a labeled corpus.
    BuildTvdb(BuildTvdbArgs),
    /// Train the one-vs-rest classifier and assign categories to every document.
    Classify(ClassifyArgs),
    /// Build the inverted index with category assignments.
    Index(IndexArgs),
    /// Run one query and print the ranking as TSV.
    Search(SearchArgs),
    /// Score every query under the chosen modes against relevance judgments.
    Eval(EvalArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Write a synthetic corpus with matching queries, profiles and judgments.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Stopword list, one term per line; the built-in English list if omitted.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildTvdbArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long)]
    pub tvdb: Option<PathBuf>,
    /// Where to write the trained model (JSON).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Where to write per-document categories (JSONL).
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// Index directory to create or overwrite.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long = "index")]
    pub index_dir: Option<PathBuf>,
    #[arg(long)]
    pub tvdb: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// JSON array of user profiles.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Click journal (JSONL).
    #[arg(long = "clicks")]
    pub click_log: Option<PathBuf>,
    /// JSON object with `female` and `male` marker term lists.
    #[arg(long = "lexicon")]
    pub gender_lexicon: Option<PathBuf>,
    /// Global clicks at which a document counts as a hot link.
    #[arg(long)]
    pub hot_threshold: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub query: String,
    #[arg(long, default_value = "comprehensive")]
    pub mode: Mode,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub user: Option<String>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One query per line, optionally followed by TAB and a user id.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// JSONL of `{"query","doc_id","rel","user_id"?}`.
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    /// Comma-separated modes, or `all`.
    #[arg(long, default_value = "all")]
    pub modes: String,
    /// Rank cutoff for DCG and nDCG.
    #[arg(long)]
    pub k: Option<usize>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also write mean and median retrieval time per mode as TSV.
    #[arg(long)]
    pub timing: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory of static files served for paths outside the API.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    /// Twelve documents over three concepts.
    Toy,
    /// Three disjoint concepts plus unlabeled mixed documents.
    Planted,
    /// Five concepts with one planted user profile each.
    Personalization,
    /// Many documents over ten concepts.
    Large,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Documents for `large`.
    #[arg(long, default_value_t = 10_000)]
    pub docs: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcsa: {e:#}");
            if e.is::<config::UsageError>() {
                eprintln!("run `mcsa --help` for usage");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
