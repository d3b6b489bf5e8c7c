//! Gibbs-EM fitting.
//!
//! Each outer iteration resamples one topic per post from its conditional
//! given `theta` and `tau` (the Gibbs part), then runs block-wise ascent on
//! `tau`, `theta`, `log A`, `log H` with the topics held fixed (the EM part).
//!
//! Every block separates by row (topics for `tau`, users for the rest), so
//! rows are updated in parallel, each with its own backtracking line search.
//! Random draws come from per-post streams and all reductions run in index
//! order, which makes results independent of the worker count.

mod update;

use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::corpus::{Dataset, PairSample};
use crate::model::{
    joint_log_likelihood, sample_dirichlet, sample_from_logits, HyperParams, ModelParams, PairIndex, SufficientStats,
    TopicAssignments, PROB_FLOOR,
};
use crate::rng::{derive_seed, stream, Domain};
use crate::{Error, Result};

pub use update::MAX_HALVINGS;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_iters: usize,
    /// Block-ascent rounds per EM part.
    pub em_steps_per_iter: usize,
    /// Gibbs sweeps per outer iteration.
    pub gibbs_sweeps: usize,
    /// Fraction of a full step tried first by every line search: the
    /// multiplicative fixed-point step for `tau`/`theta`, and a Newton step
    /// on the Gaussian prior for `log A`/`log H`.
    pub learning_rate: f64,
    /// Relative objective change below which an iteration counts as settled;
    /// three settled iterations in a row stop the fit.
    pub convergence_tol: f64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iters: 200,
            em_steps_per_iter: 3,
            gibbs_sweeps: 1,
            learning_rate: 1.0,
            convergence_tol: 1e-4,
            workers: 1,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.em_steps_per_iter == 0 || self.gibbs_sweeps == 0 {
            return Err(Error::InvalidArgument("iteration counts must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    /// Objective after the EM part of each iteration.
    pub objective: Vec<f64>,
    pub gibbs_ms: Vec<f64>,
    pub em_ms: Vec<f64>,
    pub converged: bool,
}

impl FitTrace {
    /// One `iter<TAB>objective<TAB>gibbs_ms<TAB>em_ms` line per iteration.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, ((obj, g), e)) in self.objective.iter().zip(&self.gibbs_ms).zip(&self.em_ms).enumerate() {
            out.push_str(&format!("{}\t{obj}\t{g:.3}\t{e:.3}\n", i + 1));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ModelParams,
    pub assignments: TopicAssignments,
    pub trace: FitTrace,
}

/// Random starting point: `tau` and `theta` rows from their Dirichlet priors,
/// log-hubs and log-authorities from their Gaussians around `theta`, and
/// uniformly random post topics.
pub fn init_params(train: &Dataset, hp: &HyperParams, seed: u64) -> Result<(ModelParams, TopicAssignments)> {
    hp.validate()?;
    let (k, n, w) = (hp.topics, train.n_users(), train.vocab().len());
    let mut rng = stream(seed, Domain::Init, 0);
    let mut tau = Array2::zeros((k, w));
    for mut row in tau.rows_mut() {
        row.assign(&ndarray::Array1::from(sample_dirichlet(&mut rng, hp.gamma, w)));
    }
    let mut theta = Array2::zeros((n, k));
    for mut row in theta.rows_mut() {
        row.assign(&ndarray::Array1::from(sample_dirichlet(&mut rng, hp.alpha, k)));
    }
    let mut hub = Array2::zeros((n, k));
    let mut authority = Array2::zeros((n, k));
    for u in 0..n {
        for t in 0..k {
            let x: f64 = Normal::new(theta[[u, t]], hp.delta).expect("positive delta").sample(&mut rng);
            hub[[u, t]] = x.exp();
            let x: f64 = Normal::new(theta[[u, t]], hp.sigma).expect("positive sigma").sample(&mut rng);
            authority[[u, t]] = x.exp();
        }
    }
    let z = (0..train.posts().len()).map(|_| rng.random_range(0..k)).collect();
    Ok((ModelParams { tau, theta, authority, hub }, TopicAssignments { z }))
}

/// Draws each post's topic with probability proportional to
/// `theta[author, k] * Π_n tau[k, w_n]`, computed in log space. Post `i`
/// uses its own stream keyed by `(seed, i)`.
pub fn sample_topics(train: &Dataset, params: &ModelParams, seed: u64) -> TopicAssignments {
    let k = params.topics();
    let ln_tau = params.tau.mapv(|p| p.max(PROB_FLOOR).ln());
    let ln_theta = params.theta.mapv(|p| p.max(PROB_FLOOR).ln());
    let z = train
        .posts()
        .par_iter()
        .enumerate()
        .map(|(i, post)| {
            if k == 1 {
                return 0;
            }
            let mut logits: Vec<f64> = (0..k)
                .map(|t| ln_theta[[post.author, t]] + post.tokens.iter().map(|&w| ln_tau[[t, w as usize]]).sum::<f64>())
                .collect();
            let mut rng = stream(seed, Domain::Gibbs, i as u64);
            sample_from_logits(&mut rng, &mut logits)
        })
        .collect();
    TopicAssignments { z }
}

/// Runs `cfg.em_steps_per_iter` rounds of block ascent, updating `tau`, then
/// `theta`, then `log A`, then `log H`. With topics fixed the objective never
/// decreases: a row keeps its old value when no trial step improves it.
pub fn em_step(
    train: &Dataset,
    pairs: &PairSample,
    params: &ModelParams,
    z: &TopicAssignments,
    hp: &HyperParams,
    cfg: &FitConfig,
) -> Result<ModelParams> {
    cfg.validate()?;
    let stats = SufficientStats::new(train, z, params.topics());
    let index = PairIndex::new(pairs);
    cfg.pool()?.install(|| update::em_rounds(params, &stats, &index, hp, cfg))
}

pub fn fit(train: &Dataset, pairs: &PairSample, hp: &HyperParams, cfg: &FitConfig) -> Result<FitResult> {
    hp.validate()?;
    cfg.validate()?;
    if pairs.n_users() != train.n_users() {
        return Err(Error::DimensionMismatch { expected: train.n_users(), actual: pairs.n_users() });
    }
    let (mut params, mut z) = init_params(train, hp, cfg.seed)?;
    let index = PairIndex::new(pairs);
    let mut trace = FitTrace::default();
    let mut settled = 0;

    cfg.pool()?.install(|| {
        for iter in 0..cfg.max_iters {
            let start = Instant::now();
            for sweep in 0..cfg.gibbs_sweeps {
                let key = (iter * cfg.gibbs_sweeps + sweep) as u64;
                z = sample_topics(train, &params, derive_seed(cfg.seed, key));
            }
            let gibbs_ms = start.elapsed().as_secs_f64() * 1e3;

            let start = Instant::now();
            let stats = SufficientStats::new(train, &z, hp.topics);
            params = update::em_rounds(&params, &stats, &index, hp, cfg)?;
            let em_ms = start.elapsed().as_secs_f64() * 1e3;

            let objective = joint_log_likelihood(train, pairs, &params, &z, hp);
            if !objective.is_finite() {
                return Err(Error::NonFiniteObjective { iteration: iter + 1 });
            }
            if let Some(&prev) = trace.objective.last() {
                let rel = ((objective - prev) / prev.abs().max(f64::MIN_POSITIVE)).abs();
                settled = if rel < cfg.convergence_tol { settled + 1 } else { 0 };
            }
            trace.objective.push(objective);
            trace.gibbs_ms.push(gibbs_ms);
            trace.em_ms.push(em_ms);
            if settled >= 3 {
                trace.converged = true;
                break;
            }
        }
        Ok(())
    })?;

    Ok(FitResult { params, assignments: z, trace })
}
