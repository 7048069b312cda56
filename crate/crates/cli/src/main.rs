use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "uiq", version, about = "Query, synthesize and collect over UI hierarchy snapshots")]
struct Cli {
    /// JSON settings file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print summaries and reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse hierarchy dumps or snapshot JSON and summarize them.
    Ingest(IngestArgs),
    /// Generate queries that select a demonstrated element.
    Synthesize(SynthesizeArgs),
    /// Replay an event stream through collectors into a record sink.
    Run(RunArgs),
    /// Score collected records against ground-truth labels.
    Eval(EvalArgs),
    /// Show a query's structure, English rendering and predicate tiers.
    Explain(ExplainArgs),
    /// Serve the HTTP API over a snapshot directory.
    Serve(ServeArgs),
    /// Write a seeded synthetic event stream, labels and collector spec.
    GenerateCorpus(GenerateArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Snapshot files (`.xml` dumps or `uiq-snapshot/1` JSON).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Write canonical JSON for each input into this directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthesizeArgs {
    pub snapshot: PathBuf,
    /// Target node id.
    #[arg(long, conflicts_with = "text")]
    pub node: Option<u32>,
    /// Target by exact text or content description.
    #[arg(long)]
    pub text: Option<String>,
    /// Print only the top candidate; no prompt.
    #[arg(long)]
    pub top: bool,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    /// Where the chosen query is saved as a collector spec.
    #[arg(long, default_value = "collector.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub collector_id: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub start: i64,
    #[arg(long, default_value_t = i64::MAX)]
    pub end: i64,
}

#[derive(Args)]
pub struct RunArgs {
    /// Collector spec files.
    #[arg(required = true)]
    pub specs: Vec<PathBuf>,
    /// Event stream (NDJSON).
    #[arg(long)]
    pub events: PathBuf,
    /// Record sink; overrides the config file.
    #[arg(long)]
    pub sink: Option<PathBuf>,
    /// Record every extracted value (baseline mode).
    #[arg(long)]
    pub no_dedup: bool,
    /// Period the collector was not running, as `start:end` in ms.
    #[arg(long = "gap", value_parser = commands::parse_gap)]
    pub gaps: Vec<uiq::runtime::Gap>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Record sink (NDJSON).
    #[arg(long, required_unless_present = "recall_counts")]
    pub records: Option<PathBuf>,
    /// Ground-truth labels (NDJSON).
    #[arg(long, required_unless_present = "recall_counts")]
    pub labels: Option<PathBuf>,
    /// Collector specs, to tag records with their app package.
    #[arg(long = "spec")]
    pub specs: Vec<PathBuf>,
    /// Matching window in ms; overrides the config file.
    #[arg(long)]
    pub window: Option<i64>,
    /// Score given counts instead of files: `matched/labels`.
    #[arg(long, requires = "precision_counts", value_parser = commands::parse_fraction)]
    pub recall_counts: Option<(usize, usize)>,
    /// `matched/records`.
    #[arg(long, requires = "recall_counts", value_parser = commands::parse_fraction)]
    pub precision_counts: Option<(usize, usize)>,
}

#[derive(Args)]
pub struct ExplainArgs {
    pub query: String,
}

#[derive(Args)]
pub struct ServeArgs {
    /// Snapshot directory; overrides the config file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub sink: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub events: usize,
    #[arg(long, default_value_t = 1)]
    pub min_targets: usize,
    #[arg(long, default_value_t = 1)]
    pub max_targets: usize,
    #[arg(long, default_value_t = 0.0)]
    pub repeat_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub foreign_rate: f64,
    /// Output directory for events.ndjson, labels.ndjson and collector.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = match commands::Context::load(cli.config.as_deref(), cli.json) {
        Ok(c) => c,
        Err(e) => return e.report(),
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&ctx, a),
        Command::Synthesize(a) => commands::synthesize(&ctx, a),
        Command::Run(a) => commands::run(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Explain(a) => commands::explain(&ctx, a),
        Command::Serve(a) => commands::serve(&ctx, a),
        Command::GenerateCorpus(a) => commands::generate(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
