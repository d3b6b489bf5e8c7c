//! `hat`: ingest social data, train HAT and baseline models, evaluate link
//! recommendation and report per-topic hubs and authorities.
//!
//! Exit codes: 0 success, 2 bad input or configuration, 3 numerical failure,
//! 4 model/dataset mismatch.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Compat(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Compat(_) => 4,
        }
    }
}

impl From<hat::Error> for CliError {
    fn from(e: hat::Error) -> Self {
        match e {
            hat::Error::NonFiniteGradient { .. } | hat::Error::NonFiniteObjective { .. } => {
                CliError::Numeric(e.to_string())
            }
            hat::Error::Incompatible(_) => CliError::Compat(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "hat", version, about = "Hub and authority topic modelling for follow recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read an edge file and a post file, write a dataset bundle.
    Ingest(Options),
    /// Split the dataset, fit the selected method on the training part.
    Train(Options),
    /// Score held-out links (and posts, for topic models).
    Evaluate(Options),
    /// Print the top-ranked users for one user to follow.
    Recommend(RecommendArgs),
    /// Sample a synthetic dataset and its ground-truth model.
    Generate(Options),
    /// Print per-topic keywords, authorities and hubs of a HAT model.
    Report(ReportArgs),
}

#[derive(Args)]
struct RecommendArgs {
    #[command(flatten)]
    opts: Options,
    /// User name to recommend for.
    #[arg(long)]
    user: String,
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    opts: Options,
    /// Entries per list.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

/// Settings shared by every command. Anything given here overrides the
/// `--config` file, which overrides the defaults.
#[derive(Args, Default)]
struct Options {
    /// `key=value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Follow edges, one `follower<TAB>followee` per line.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Posts, one `user<TAB>text` per line.
    #[arg(long)]
    posts: Option<PathBuf>,
    /// Dataset bundle written by `ingest` or `generate`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Directory written by `train`.
    #[arg(long)]
    model_dir: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// hat, lda, twitter-lda or hits.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    subsample_pct: Option<f64>,
    #[arg(long)]
    split_frac: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    em_steps: Option<usize>,
    #[arg(long)]
    gibbs_sweeps: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    convergence_tol: Option<f64>,
    #[arg(long)]
    min_word_count: Option<usize>,
    /// Users to generate.
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    posts_per_user: Option<usize>,
    #[arg(long)]
    words_per_post: Option<usize>,
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Generate links with mean 1 - f(H·A).
    #[arg(long)]
    complement_links: bool,
}

impl Options {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((key, v));
            }
        };
        let s = |v: &Option<f64>| v.map(|x| x.to_string());
        let u = |v: &Option<usize>| v.map(|x| x.to_string());
        let p = |v: &Option<PathBuf>| v.as_ref().map(|x| x.display().to_string());
        push("edges", p(&self.edges));
        push("posts", p(&self.posts));
        push("data", p(&self.data));
        push("model_dir", p(&self.model_dir));
        push("out", p(&self.out));
        push("method", self.method.clone());
        push("topics", u(&self.topics));
        push("lambda", s(&self.lambda));
        push("sigma", s(&self.sigma));
        push("delta", s(&self.delta));
        push("alpha", s(&self.alpha));
        push("gamma", s(&self.gamma));
        push("subsample_pct", s(&self.subsample_pct));
        push("split_frac", s(&self.split_frac));
        push("seed", self.seed.map(|x| x.to_string()));
        push("workers", u(&self.workers));
        push("max_iters", u(&self.max_iters));
        push("em_steps", u(&self.em_steps));
        push("gibbs_sweeps", u(&self.gibbs_sweeps));
        push("learning_rate", s(&self.learning_rate));
        push("convergence_tol", s(&self.convergence_tol));
        push("min_word_count", u(&self.min_word_count));
        push("users", u(&self.users));
        push("posts_per_user", u(&self.posts_per_user));
        push("words_per_post", u(&self.words_per_post));
        push("vocab_size", u(&self.vocab_size));
        push("complement_links", self.complement_links.then(|| "true".to_string()));
        out
    }

    /// Defaults, then the saved training config (for commands that read a
    /// model directory), then `--config`, then flags.
    fn resolve(&self, reads_model: bool) -> Result<RunConfig, CliError> {
        let layered = |base: RunConfig| -> Result<RunConfig, CliError> {
            let mut cfg = base;
            if let Some(path) = &self.config {
                cfg.apply_file(path)?;
            }
            for (key, value) in self.overrides() {
                cfg.set(key, &value).map_err(|m| CliError::Input(format!("--{}: {m}", key.replace('_', "-"))))?;
            }
            Ok(cfg)
        };
        let mut cfg = layered(RunConfig::default())?;
        if reads_model {
            if let Some(dir) = cfg.model_dir.clone() {
                let saved = dir.join(commands::CONFIG_FILE);
                if saved.exists() {
                    let mut base = RunConfig::default();
                    base.apply_file(&saved)?;
                    cfg = layered(base)?;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (opts, reads_model) = match &cli.command {
        Command::Ingest(o) | Command::Train(o) | Command::Generate(o) => (o, false),
        Command::Evaluate(o) => (o, true),
        Command::Recommend(a) => (&a.opts, true),
        Command::Report(a) => (&a.opts, true),
    };
    let cfg = opts.resolve(reads_model)?;
    eprint!("# resolved configuration\n{cfg}");
    match &cli.command {
        Command::Ingest(_) => commands::ingest(&cfg),
        Command::Train(_) => commands::train(&cfg),
        Command::Evaluate(_) => commands::evaluate(&cfg),
        Command::Recommend(a) => commands::recommend(&cfg, &a.user, a.top),
        Command::Generate(_) => commands::generate(&cfg),
        Command::Report(a) => commands::report(&cfg, a.top),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
