//! Run configuration: defaults, `key=value` files and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hat::inference::FitConfig;
use hat::model::HyperParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Hat,
    Lda,
    TwitterLda,
    Hits,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hat => "hat",
            Method::Lda => "lda",
            Method::TwitterLda => "twitter-lda",
            Method::Hits => "hits",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hat" => Ok(Method::Hat),
            "lda" => Ok(Method::Lda),
            "twitter-lda" => Ok(Method::TwitterLda),
            "hits" => Ok(Method::Hits),
            _ => Err(format!("unknown method `{s}` (expected hat, lda, twitter-lda or hits)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub topics: usize,
    /// `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub gamma: f64,
    pub sigma: f64,
    pub delta: f64,
    pub lambda: f64,
    pub subsample_pct: f64,
    pub split_frac: f64,
    pub seed: u64,
    pub workers: usize,
    pub max_iters: usize,
    pub em_steps: usize,
    pub gibbs_sweeps: usize,
    pub learning_rate: f64,
    pub convergence_tol: f64,
    pub min_word_count: usize,
    pub edges: Option<PathBuf>,
    pub posts: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub model_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub users: usize,
    pub posts_per_user: usize,
    pub words_per_post: usize,
    pub vocab_size: usize,
    pub complement_links: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fit = FitConfig::default();
        let hp = HyperParams::new(4);
        RunConfig {
            method: Method::Hat,
            topics: 4,
            alpha: None,
            gamma: hp.gamma,
            sigma: hp.sigma,
            delta: hp.delta,
            lambda: hp.lambda,
            subsample_pct: hp.subsample_pct,
            split_frac: 0.5,
            seed: 0,
            workers: fit.workers,
            max_iters: fit.max_iters,
            em_steps: fit.em_steps_per_iter,
            gibbs_sweeps: fit.gibbs_sweeps,
            learning_rate: fit.learning_rate,
            convergence_tol: fit.convergence_tol,
            min_word_count: 1,
            edges: None,
            posts: None,
            data: None,
            model_dir: None,
            out: None,
            users: 200,
            posts_per_user: 20,
            words_per_post: 10,
            vocab_size: 300,
            complement_links: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

impl RunConfig {
    /// Keys accepted by [`RunConfig::set`], in echo order.
    pub const KEYS: &'static [&'static str] = &[
        "method",
        "topics",
        "alpha",
        "gamma",
        "sigma",
        "delta",
        "lambda",
        "subsample_pct",
        "split_frac",
        "seed",
        "workers",
        "max_iters",
        "em_steps",
        "gibbs_sweeps",
        "learning_rate",
        "convergence_tol",
        "min_word_count",
        "edges",
        "posts",
        "data",
        "model_dir",
        "out",
        "users",
        "posts_per_user",
        "words_per_post",
        "vocab_size",
        "complement_links",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let path = || Some(PathBuf::from(value));
        match key {
            "method" => self.method = value.parse()?,
            "topics" => self.topics = parse(key, value)?,
            "alpha" => self.alpha = Some(parse(key, value)?),
            "gamma" => self.gamma = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "subsample_pct" => self.subsample_pct = parse(key, value)?,
            "split_frac" => self.split_frac = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "max_iters" => self.max_iters = parse(key, value)?,
            "em_steps" => self.em_steps = parse(key, value)?,
            "gibbs_sweeps" => self.gibbs_sweeps = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "convergence_tol" => self.convergence_tol = parse(key, value)?,
            "min_word_count" => self.min_word_count = parse(key, value)?,
            "edges" => self.edges = path(),
            "posts" => self.posts = path(),
            "data" => self.data = path(),
            "model_dir" => self.model_dir = path(),
            "out" => self.out = path(),
            "users" => self.users = parse(key, value)?,
            "posts_per_user" => self.posts_per_user = parse(key, value)?,
            "words_per_post" => self.words_per_post = parse(key, value)?,
            "vocab_size" => self.vocab_size = parse(key, value)?,
            "complement_links" => self.complement_links = parse(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        match key {
            "method" => self.method.name().to_string(),
            "topics" => self.topics.to_string(),
            "alpha" => self.hyper_params().alpha.to_string(),
            "gamma" => self.gamma.to_string(),
            "sigma" => self.sigma.to_string(),
            "delta" => self.delta.to_string(),
            "lambda" => self.lambda.to_string(),
            "subsample_pct" => self.subsample_pct.to_string(),
            "split_frac" => self.split_frac.to_string(),
            "seed" => self.seed.to_string(),
            "workers" => self.workers.to_string(),
            "max_iters" => self.max_iters.to_string(),
            "em_steps" => self.em_steps.to_string(),
            "gibbs_sweeps" => self.gibbs_sweeps.to_string(),
            "learning_rate" => self.learning_rate.to_string(),
            "convergence_tol" => self.convergence_tol.to_string(),
            "min_word_count" => self.min_word_count.to_string(),
            "edges" => path(&self.edges),
            "posts" => path(&self.posts),
            "data" => path(&self.data),
            "model_dir" => path(&self.model_dir),
            "out" => path(&self.out),
            "users" => self.users.to_string(),
            "posts_per_user" => self.posts_per_user.to_string(),
            "words_per_post" => self.words_per_post.to_string(),
            "vocab_size" => self.vocab_size.to_string(),
            "complement_links" => self.complement_links.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Applies a `key=value` file. Blank lines and lines starting with `#`
    /// are ignored; empty values leave the current setting.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| CliError::Input(format!("{}:{}: {m}", path.display(), i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key=value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                if !Self::KEYS.contains(&key) {
                    return Err(err(format!("unknown key `{key}`")));
                }
                continue;
            }
            self.set(key, value).map_err(err)?;
        }
        Ok(())
    }

    pub fn hyper_params(&self) -> HyperParams {
        let mut hp = HyperParams::new(self.topics);
        if let Some(a) = self.alpha {
            hp.alpha = a;
        }
        hp.gamma = self.gamma;
        hp.sigma = self.sigma;
        hp.delta = self.delta;
        hp.lambda = self.lambda;
        hp.subsample_pct = self.subsample_pct;
        hp
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            max_iters: self.max_iters,
            em_steps_per_iter: self.em_steps,
            gibbs_sweeps: self.gibbs_sweeps,
            learning_rate: self.learning_rate,
            convergence_tol: self.convergence_tol,
            workers: self.workers,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let input = |e: hat::Error| CliError::Input(e.to_string());
        self.hyper_params().validate().map_err(input)?;
        self.fit_config().validate().map_err(input)?;
        if !(self.split_frac > 0.0 && self.split_frac <= 1.0) {
            return Err(CliError::Input(format!("split_frac {} not in (0, 1]", self.split_frac)));
        }
        if self.min_word_count == 0 {
            return Err(CliError::Input("min_word_count must be at least 1".into()));
        }
        Ok(())
    }

    /// The settings that determine a trained model; the worker count is left
    /// out so the file does not depend on it.
    pub fn to_file(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            if matches!(*key, "workers" | "out" | "model_dir") {
                continue;
            }
            out.push_str(&format!("{key}={}\n", self.get(key)));
        }
        out
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for key in Self::KEYS {
            writeln!(f, "{key}={}", self.get(key))?;
        }
        Ok(())
    }
}
