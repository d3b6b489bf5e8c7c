//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use hat::baselines::{
    fit_lda, fit_twitter_lda, hits, perplexity, read_hits, read_lda, read_twitter_lda, write_hits, write_lda,
    write_twitter_lda, HitsScores, LdaConfig, LdaModel, PiPrior, TopicModel, TwitterLdaModel, HITS_MAGIC, LDA_MAGIC,
    TWITTER_LDA_MAGIC,
};
use hat::corpus::{
    ingest as ingest_corpus, read_dataset, split, subsample_pairs, write_dataset, Dataset, TrainTestSplit,
};
use hat::eval::{metrics_tsv, rank_candidates, topic_report, HatScorer, HitsScorer, InterestScorer, LinkScorer};
use hat::inference::fit;
use hat::model::{generate as generate_synthetic, read_model, write_model, GenerateConfig, ModelParams, MODEL_MAGIC};

use crate::config::{Method, RunConfig};
use crate::CliError;

pub const CONFIG_FILE: &str = "config.txt";
pub const MODEL_FILE: &str = "model.txt";
pub const TRACE_FILE: &str = "trace.tsv";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const DATASET_FILE: &str = "dataset.txt";
pub const TRUTH_FILE: &str = "truth_model.txt";

/// HITS iteration cap and tolerance.
const HITS_MAX_ITERS: usize = 10_000;
const HITS_TOL: f64 = 1e-12;

/// Precision is reported for these cut-offs.
const RANK_CUTOFFS: std::ops::RangeInclusive<usize> = 1..=4;

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| CliError::Input(format!("missing --{flag}")))
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn ingest(cfg: &RunConfig) -> Result<(), CliError> {
    let edges = required(&cfg.edges, "edges")?;
    let posts = required(&cfg.posts, "posts")?;
    let out = required(&cfg.out, "out")?;
    let ds = ingest_corpus(edges, posts, cfg.min_word_count)?;
    write(out, &write_dataset(&ds))?;
    println!("{}", ds.stats());
    Ok(())
}

fn lda_config(cfg: &RunConfig) -> LdaConfig {
    let hp = cfg.hyper_params();
    LdaConfig { topics: hp.topics, alpha: hp.alpha, gamma: hp.gamma, iters: cfg.max_iters, seed: cfg.seed }
}

fn load_split(cfg: &RunConfig) -> Result<TrainTestSplit, CliError> {
    let data = read_dataset(required(&cfg.data, "data")?)?;
    Ok(split(&data, cfg.split_frac, cfg.seed)?)
}

pub fn train(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = required(&cfg.out, "out")?;
    let s = load_split(cfg)?;
    create_dir(dir)?;
    let model = match cfg.method {
        Method::Hat => {
            let hp = cfg.hyper_params();
            let pairs = subsample_pairs(s.train.graph(), hp.subsample_pct, cfg.seed)?;
            let r = fit(&s.train, &pairs, &hp, &cfg.fit_config())?;
            write(&dir.join(TRACE_FILE), &r.trace.to_tsv())?;
            eprintln!("fitted {} iterations, converged: {}", r.trace.objective.len(), r.trace.converged);
            write_model(&r.params)
        }
        Method::Lda => write_lda(&fit_lda(&s.train, &lda_config(cfg))?),
        Method::TwitterLda => write_twitter_lda(&fit_twitter_lda(&s.train, &lda_config(cfg), PiPrior::default())?),
        Method::Hits => write_hits(&hits(s.train.graph(), HITS_MAX_ITERS, HITS_TOL)?),
    };
    write(&dir.join(MODEL_FILE), &model)?;
    write(&dir.join(CONFIG_FILE), &cfg.to_file())?;
    Ok(())
}

enum Fitted {
    Hat(ModelParams),
    Lda(LdaModel),
    TwitterLda(TwitterLdaModel),
    Hits(HitsScores),
}

impl Fitted {
    fn load(path: &Path, method: Method) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let magic = text.lines().next().unwrap_or("");
        let fitted = match magic {
            MODEL_MAGIC => Fitted::Hat(read_model(path)?),
            LDA_MAGIC => Fitted::Lda(read_lda(path)?),
            TWITTER_LDA_MAGIC => Fitted::TwitterLda(read_twitter_lda(path)?),
            HITS_MAGIC => Fitted::Hits(read_hits(path)?),
            _ => return Err(CliError::Compat(format!("{}: unrecognised model header `{magic}`", path.display()))),
        };
        if fitted.method() != method {
            return Err(CliError::Compat(format!(
                "{} holds a {} model but the method is {}",
                path.display(),
                fitted.method().name(),
                method.name()
            )));
        }
        Ok(fitted)
    }

    fn method(&self) -> Method {
        match self {
            Fitted::Hat(_) => Method::Hat,
            Fitted::Lda(_) => Method::Lda,
            Fitted::TwitterLda(_) => Method::TwitterLda,
            Fitted::Hits(_) => Method::Hits,
        }
    }

    /// Users and (for topic models) words.
    fn dims(&self) -> (usize, Option<usize>) {
        match self {
            Fitted::Hat(m) => (m.n_users(), Some(m.n_words())),
            Fitted::Lda(m) => (m.theta.nrows(), Some(m.tau.ncols())),
            Fitted::TwitterLda(m) => (m.theta.nrows(), Some(m.tau.ncols())),
            Fitted::Hits(s) => (s.hub.len(), None),
        }
    }

    fn check_against(&self, ds: &Dataset) -> Result<(), CliError> {
        let (users, words) = self.dims();
        if users != ds.n_users() {
            return Err(CliError::Compat(format!("model has {users} users, dataset has {}", ds.n_users())));
        }
        if let Some(w) = words {
            if w != ds.vocab().len() {
                return Err(CliError::Compat(format!("model has {w} words, dataset has {}", ds.vocab().len())));
            }
        }
        Ok(())
    }

    fn scorer(&self) -> Box<dyn LinkScorer + '_> {
        match self {
            Fitted::Hat(m) => Box::new(HatScorer(m)),
            Fitted::Lda(m) => Box::new(InterestScorer(&m.theta)),
            Fitted::TwitterLda(m) => Box::new(InterestScorer(&m.theta)),
            Fitted::Hits(s) => Box::new(HitsScorer(s)),
        }
    }

    fn topic_model(&self) -> Option<TopicModel<'_>> {
        match self {
            Fitted::Hat(m) => Some(TopicModel::Hat(m)),
            Fitted::Lda(m) => Some(TopicModel::Lda(m)),
            Fitted::TwitterLda(m) => Some(TopicModel::TwitterLda(m)),
            Fitted::Hits(_) => None,
        }
    }
}

fn load_model_and_split(cfg: &RunConfig) -> Result<(Fitted, TrainTestSplit), CliError> {
    let dir = required(&cfg.model_dir, "model-dir")?;
    let model = Fitted::load(&dir.join(MODEL_FILE), cfg.method)?;
    let s = load_split(cfg)?;
    model.check_against(&s.train)?;
    Ok((model, s))
}

pub fn evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let (model, s) = load_model_and_split(cfg)?;
    let method = cfg.method.name();
    let ranking = rank_candidates(&s, model.scorer().as_ref())?;
    let mut out = metrics_tsv(method, &ranking, RANK_CUTOFFS);
    match model.topic_model() {
        Some(m) => match perplexity(m, &s.test_posts) {
            Ok(p) => out.push_str(&format!("{method}\tperplexity\t{}\n", p.value)),
            Err(hat::Error::NoTokens) => out.push_str(&format!("{method}\tperplexity\tNA\n")),
            Err(e) => return Err(e.into()),
        },
        None => out.push_str(&format!("{method}\tperplexity\tnot_applicable\n")),
    }
    let path = match &cfg.out {
        Some(p) => p.clone(),
        None => required(&cfg.model_dir, "model-dir")?.join(METRICS_FILE),
    };
    write(&path, &out)?;
    print!("{out}");
    if ranking.skipped > 0 {
        eprintln!("{} users skipped: no candidates", ranking.skipped);
    }
    Ok(())
}

pub fn recommend(cfg: &RunConfig, user: &str, top: usize) -> Result<(), CliError> {
    let (model, s) = load_model_and_split(cfg)?;
    let u = s.train.user_id(user).ok_or_else(|| CliError::Input(format!("unknown user `{user}`")))?;
    let scorer = model.scorer();
    let graph = s.train.graph();
    let mut ranked: Vec<(usize, f64)> =
        (0..s.train.n_users()).filter(|&v| v != u && !graph.has_edge(u, v)).map(|v| (v, scorer.score(u, v))).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (rank, (v, score)) in ranked.into_iter().take(top).enumerate() {
        println!("{}\t{}\t{score}", rank + 1, s.train.user_name(v));
    }
    Ok(())
}

pub fn generate(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = required(&cfg.out, "out")?;
    let mut gen = GenerateConfig::new(cfg.users, cfg.posts_per_user, cfg.words_per_post, cfg.vocab_size, cfg.seed);
    gen.complement_link_mean = cfg.complement_links;
    let g = generate_synthetic(&cfg.hyper_params(), &gen)?;
    create_dir(dir)?;
    write(&dir.join(DATASET_FILE), &write_dataset(&g.dataset))?;
    write(&dir.join(TRUTH_FILE), &write_model(&g.params))?;
    println!("{}", g.dataset.stats());
    Ok(())
}

pub fn report(cfg: &RunConfig, top: usize) -> Result<(), CliError> {
    let dir = required(&cfg.model_dir, "model-dir")?;
    let Fitted::Hat(params) = Fitted::load(&dir.join(MODEL_FILE), cfg.method)? else {
        return Err(CliError::Compat(format!("report needs a hat model, not {}", cfg.method.name())));
    };
    let data = read_dataset(required(&cfg.data, "data")?)?;
    Fitted::Hat(params.clone()).check_against(&data)?;
    print!("{}", topic_report(&params, data.vocab(), data.users(), top));
    Ok(())
}
