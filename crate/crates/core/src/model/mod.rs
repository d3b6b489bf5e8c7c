//! HAT parameters, the squashing link function, the joint objective and the
//! forward generator.

mod format;
mod generate;
mod likelihood;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

pub use format::{read_model, write_model, MODEL_MAGIC};
pub use generate::{generate, GenerateConfig, Generated};
pub(crate) use likelihood::{
    authority_row_objective, hub_row_objective, tau_row_objective, theta_row_objective, PairIndex,
};
pub use likelihood::{
    gradient, joint_log_likelihood, likelihood_terms, LikelihoodTerms, ParamGradient, SufficientStats,
};

use crate::{Error, Result};

/// Floor applied to every probability before taking its log, and lower
/// bound of every entry of `tau` and `theta`.
pub const PROB_FLOOR: f64 = 1e-10;

/// Priors and fixed inputs of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub topics: usize,
    /// Symmetric Dirichlet prior on each user's topic distribution.
    pub alpha: f64,
    /// Symmetric Dirichlet prior on each topic's word distribution.
    pub gamma: f64,
    /// Deviation of log-authority around `theta`.
    pub sigma: f64,
    /// Deviation of log-hub around `theta`.
    pub delta: f64,
    /// Scale of the squashing function, in (0, 1).
    pub lambda: f64,
    /// Percentage of 2-hop non-links retained for training.
    pub subsample_pct: f64,
}

impl HyperParams {
    /// Defaults: `alpha = 50/K`, `gamma = 0.01`, `sigma = delta = 1`,
    /// `lambda = 0.5`, 20% non-link sub-sampling.
    pub fn new(topics: usize) -> Self {
        HyperParams {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            gamma: 0.01,
            sigma: 1.0,
            delta: 1.0,
            lambda: 0.5,
            subsample_pct: 20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.topics == 0 {
            return bad("topics must be at least 1".into());
        }
        for (name, v) in [("alpha", self.alpha), ("gamma", self.gamma), ("sigma", self.sigma), ("delta", self.delta)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if !(0.0..=100.0).contains(&self.subsample_pct) {
            return bad(format!("subsample percentage must lie in [0, 100], got {}", self.subsample_pct));
        }
        Ok(())
    }
}

/// `f(x, λ) = 2 (1 / (e^{-λx} + 1) - 1/2)`.
pub fn squash(x: f64, lambda: f64) -> f64 {
    2.0 * (1.0 / ((-lambda * x).exp() + 1.0) - 0.5)
}

/// Probability that a user with hub vector `hub` follows a user with
/// authority vector `authority`.
pub fn link_probability(hub: &[f64], authority: &[f64], lambda: f64) -> Result<f64> {
    Ok(squash(dot(hub, authority)?, lambda))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

/// Fitted or ground-truth parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// K × W, row-stochastic: word distribution of each topic.
    pub tau: Array2<f64>,
    /// N × K, row-stochastic: topic distribution of each user.
    pub theta: Array2<f64>,
    /// N × K, positive: topic-specific authority.
    pub authority: Array2<f64>,
    /// N × K, positive: topic-specific hub.
    pub hub: Array2<f64>,
}

impl ModelParams {
    pub fn topics(&self) -> usize {
        self.tau.nrows()
    }

    pub fn n_words(&self) -> usize {
        self.tau.ncols()
    }

    pub fn n_users(&self) -> usize {
        self.theta.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let (k, n) = (self.topics(), self.n_users());
        for (name, m) in [("theta", &self.theta), ("authority", &self.authority), ("hub", &self.hub)] {
            if m.dim() != (n, k) {
                return Err(Error::Incompatible(format!("{name} has shape {:?}, expected ({n}, {k})", m.dim())));
            }
        }
        for (name, m) in [("tau", &self.tau), ("theta", &self.theta)] {
            for (i, row) in m.rows().into_iter().enumerate() {
                let sum: f64 = row.sum();
                if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&x| !(x >= PROB_FLOOR)) {
                    return Err(Error::Incompatible(format!("{name} row {i} is not a floored distribution")));
                }
            }
        }
        for (name, m) in [("authority", &self.authority), ("hub", &self.hub)] {
            if m.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::Incompatible(format!("{name} has a non-positive or non-finite entry")));
            }
        }
        Ok(())
    }
}

/// One topic per post, aligned with `Dataset::posts()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicAssignments {
    pub z: Vec<usize>,
}

/// Normalizes non-negative weights in place, then lifts entries below
/// [`PROB_FLOOR`] to the floor and rescales the rest so the row sums to one.
/// A row that already satisfies both constraints is left unchanged.
pub(crate) fn floor_simplex(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    for x in row.iter_mut() {
        *x /= sum;
    }
    loop {
        let floored = row.iter().filter(|&&x| x < PROB_FLOOR).count();
        if floored == 0 {
            return;
        }
        let free: f64 = row.iter().filter(|&&x| x >= PROB_FLOOR).sum();
        let scale = (1.0 - floored as f64 * PROB_FLOOR) / free;
        for x in row.iter_mut() {
            *x = if *x < PROB_FLOOR { PROB_FLOOR } else { *x * scale };
        }
    }
}

/// Log-space softmax followed by [`floor_simplex`].
pub(crate) fn floor_simplex_from_logs(logs: &mut [f64]) {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for x in logs.iter_mut() {
        *x = (*x - max).exp();
    }
    floor_simplex(logs);
}

/// Symmetric Dirichlet draw, computed in log space so tiny concentrations
/// do not underflow to an all-zero vector.
pub(crate) fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, alpha: f64, dim: usize) -> Vec<f64> {
    // G ~ Gamma(a) equals Gamma(a + 1) * U^(1/a) in distribution.
    let boosted = Gamma::new(alpha + 1.0, 1.0).expect("positive shape");
    let mut logs: Vec<f64> = (0..dim)
        .map(|_| {
            let g: f64 = boosted.sample(rng);
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            g.ln() + u.ln() / alpha
        })
        .collect();
    floor_simplex_from_logs(&mut logs);
    logs
}

/// Inverse-CDF draw from unnormalized non-negative weights.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Draws from `exp(logits)` after subtracting the max.
pub(crate) fn sample_from_logits<R: Rng + ?Sized>(rng: &mut R, logits: &mut [f64]) -> usize {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for x in logits.iter_mut() {
        *x = (*x - max).exp();
    }
    sample_categorical(rng, logits)
}
