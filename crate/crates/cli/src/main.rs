mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Engine, LabelFormat, OutputFormat, PipelineConfig};

#[derive(Debug, Parser)]
#[command(name = "cxreval", version, about = "Evaluation pipelines for chest X-ray report generation")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, display_order = 100)]
    config: Option<PathBuf>,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, display_order = 100)]
    threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, display_order = 100)]
    seed: Option<u64>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, display_order = 100, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a corpus, split it and letterbox its images.
    Prep(PrepArgs),
    /// Extract finding labels from report text.
    Label(LabelArgs),
    /// Compute text, label and graph metrics for generated reports.
    Score(ScoreArgs),
    /// Summarize a reader study.
    Study(StudyArgs),
    /// Paired-design sample size.
    SampleSize(SampleSizeArgs),
    /// Monte Carlo power of the paired t-test.
    PowerSim(PowerArgs),
    /// Serve a scripted labeler endpoint for testing.
    StubServe(StubArgs),
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    /// Corpus CSV with `case_id`, `report_text` and optional `image_path`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory that relative image paths resolve against (default: the
    /// corpus file's directory).
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Fine-tune share of the split.
    #[arg(long)]
    pub ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    /// Lexicon file for the rule engine.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<LabelFormat>,
    /// `uncertain_as_positive` or `uncertain_as_negative`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Chat-completions URL of the labeling service.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Label with an in-process scripted service.
    #[arg(long)]
    pub dry_run: bool,
    /// JSONL rules for the scripted service.
    #[arg(long)]
    pub stub_script: Option<PathBuf>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub backoff_ms: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// CSV with `case_id`, `candidate_text`, `reference_text`.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Label CSV for the candidates.
    #[arg(long, requires = "gold_labels")]
    pub pred_labels: Option<PathBuf>,
    /// Label CSV for the references.
    #[arg(long, requires = "pred_labels")]
    pub gold_labels: Option<PathBuf>,
    /// Annotation JSONL for the candidates.
    #[arg(long, requires = "ref_graphs")]
    pub hyp_graphs: Option<PathBuf>,
    /// Annotation JSONL for the references.
    #[arg(long, requires = "hyp_graphs")]
    pub ref_graphs: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// `corpus` or `sentence_mean`.
    #[arg(long)]
    pub bleu: Option<String>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Study data as long CSV or JSON lines (by extension).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Option<Vec<OutputFormat>>,
    /// Preference threshold k.
    #[arg(long)]
    pub threshold: Option<usize>,
    /// `pooled` or `case_means`.
    #[arg(long)]
    pub mean_mode: Option<String>,
    /// CSV with `score` and `truth` columns for a ROC curve.
    #[arg(long)]
    pub roc: Option<PathBuf>,
    /// Also write the sample-size report.
    #[arg(long)]
    pub sample_size: bool,
    /// Also write a power simulation report.
    #[arg(long)]
    pub power: bool,
}

#[derive(Debug, Args)]
pub struct SampleSizeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// `ceil_to_10` or `exact_ceil`.
    #[arg(long)]
    pub rounding: Option<String>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Also write the report and config snapshot here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long)]
    pub n_pairs: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StubArgs {
    #[arg(long, default_value = "127.0.0.1:8089")]
    pub addr: String,
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Artificial delay per request in milliseconds.
    #[arg(long, default_value_t = 0)]
    pub latency_ms: u64,
}

fn run(cli: Cli) -> Result<(), failure::Failure> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref()).map_err(failure::Failure::input)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(failure::Failure::input(anyhow::anyhow!("--threads must be positive")));
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Prep(a) => commands::prep::run(cfg, a),
        Command::Label(a) => commands::label::run(cfg, a),
        Command::Score(a) => commands::score::run(cfg, a),
        Command::Study(a) => commands::study::run(cfg, a),
        Command::SampleSize(a) => commands::stats::sample_size(cfg, a),
        Command::PowerSim(a) => commands::stats::power_sim(cfg, a),
        Command::StubServe(a) => commands::stub::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code())
        }
    }
}
