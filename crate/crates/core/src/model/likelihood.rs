//! Joint log-likelihood (MAP objective) and its analytic partials.
//!
//! The objective sums five groups:
//! - words: `Σ log τ[z_s, w]` over training tokens,
//! - topics: `Σ log θ[author(s), z_s]` over posts,
//! - gaussian: log-normal densities of `H` (around `θ`, deviation `δ`) and
//!   `A` (around `θ`, deviation `σ`), Jacobian included,
//! - links: Bernoulli log-likelihood of every sampled pair,
//! - priors: symmetric Dirichlet densities of `θ` rows and `τ` rows.
//!
//! Gradients are taken with respect to `τ`, `θ` (ambient coordinates) and
//! `log A`, `log H`.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};
use statrs::function::gamma::ln_gamma;

use super::{squash, HyperParams, ModelParams, TopicAssignments, PROB_FLOOR};
use crate::corpus::{Dataset, PairSample, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LikelihoodTerms {
    pub words: f64,
    pub topics: f64,
    pub gaussian: f64,
    pub links: f64,
    pub priors: f64,
}

impl LikelihoodTerms {
    pub fn total(&self) -> f64 {
        self.words + self.topics + self.gaussian + self.links + self.priors
    }
}

fn ln_floor(p: f64) -> f64 {
    p.max(PROB_FLOOR).ln()
}

/// Bernoulli log-likelihood of one pair given the hub·authority product.
pub(crate) fn link_ll(linked: bool, x: f64, lambda: f64) -> f64 {
    let q = squash(x, lambda);
    if linked {
        ln_floor(q)
    } else {
        ln_floor(1.0 - q)
    }
}

/// d/dx of [`link_ll`]; zero where the floor is active.
pub(crate) fn link_dll(linked: bool, x: f64, lambda: f64) -> f64 {
    let q = squash(x, lambda);
    let dq = 0.5 * lambda * (1.0 - q * q);
    if linked {
        if q > PROB_FLOOR {
            dq / q
        } else {
            0.0
        }
    } else if 1.0 - q > PROB_FLOOR {
        -dq / (1.0 - q)
    } else {
        0.0
    }
}

fn log_normal_ln_pdf(value: f64, mean: f64, dev: f64) -> f64 {
    let l = value.ln();
    let d = l - mean;
    -d * d / (2.0 * dev * dev) - l - dev.ln() - 0.5 * (2.0 * PI).ln()
}

fn dirichlet_ln_pdf(row: ArrayView1<f64>, conc: f64) -> f64 {
    let n = row.len() as f64;
    ln_gamma(n * conc) - n * ln_gamma(conc) + (conc - 1.0) * row.iter().map(|&p| ln_floor(p)).sum::<f64>()
}

fn row_dot(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn word_term(ds: &Dataset, tau: &Array2<f64>, z: &TopicAssignments) -> f64 {
    ds.posts()
        .iter()
        .zip(&z.z)
        .map(|(p, &k)| p.tokens.iter().map(|&w| ln_floor(tau[[k, w as usize]])).sum::<f64>())
        .sum()
}

pub fn topic_term(ds: &Dataset, theta: &Array2<f64>, z: &TopicAssignments) -> f64 {
    ds.posts().iter().zip(&z.z).map(|(p, &k)| ln_floor(theta[[p.author, k]])).sum()
}

pub fn gaussian_term(params: &ModelParams, hp: &HyperParams) -> f64 {
    let mut total = 0.0;
    for ((&t, &h), &a) in params.theta.iter().zip(&params.hub).zip(&params.authority) {
        total += log_normal_ln_pdf(h, t, hp.delta) + log_normal_ln_pdf(a, t, hp.sigma);
    }
    total
}

pub fn link_term(pairs: &PairSample, params: &ModelParams, hp: &HyperParams) -> f64 {
    pairs.iter().map(|(u, v, r)| link_ll(r, row_dot(params.hub.row(u), params.authority.row(v)), hp.lambda)).sum()
}

pub fn prior_term(params: &ModelParams, hp: &HyperParams) -> f64 {
    let theta: f64 = params.theta.rows().into_iter().map(|r| dirichlet_ln_pdf(r, hp.alpha)).sum();
    let tau: f64 = params.tau.rows().into_iter().map(|r| dirichlet_ln_pdf(r, hp.gamma)).sum();
    theta + tau
}

/// Evaluates each term group separately.
pub fn likelihood_terms(
    train: &Dataset,
    pairs: &PairSample,
    params: &ModelParams,
    z: &TopicAssignments,
    hp: &HyperParams,
) -> LikelihoodTerms {
    LikelihoodTerms {
        words: word_term(train, &params.tau, z),
        topics: topic_term(train, &params.theta, z),
        gaussian: gaussian_term(params, hp),
        links: link_term(pairs, params, hp),
        priors: prior_term(params, hp),
    }
}

/// Single pass over users; per-user partial sums are added in user order.
pub fn joint_log_likelihood(
    train: &Dataset,
    pairs: &PairSample,
    params: &ModelParams,
    z: &TopicAssignments,
    hp: &HyperParams,
) -> f64 {
    let mut total = 0.0;
    for u in 0..train.n_users() {
        let mut acc = 0.0;
        let theta_u = params.theta.row(u);
        for (p, &k) in train.posts_of(u).iter().zip(&z.z[train.post_range(u)]) {
            acc += ln_floor(theta_u[k]);
            for &w in &p.tokens {
                acc += ln_floor(params.tau[[k, w as usize]]);
            }
        }
        for k in 0..params.topics() {
            acc += log_normal_ln_pdf(params.hub[[u, k]], theta_u[k], hp.delta);
            acc += log_normal_ln_pdf(params.authority[[u, k]], theta_u[k], hp.sigma);
        }
        let hub_u = params.hub.row(u);
        for (targets, linked) in [(&pairs.positives[u], true), (&pairs.negatives[u], false)] {
            for &v in targets {
                acc += link_ll(linked, row_dot(hub_u, params.authority.row(v)), hp.lambda);
            }
        }
        acc += dirichlet_ln_pdf(theta_u, hp.alpha);
        total += acc;
    }
    for row in params.tau.rows() {
        total += dirichlet_ln_pdf(row, hp.gamma);
    }
    total
}

/// Topic-word and user-topic counts implied by an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    /// K × W token counts.
    pub topic_word: Array2<f64>,
    /// N × K post counts.
    pub user_topic: Array2<f64>,
}

impl SufficientStats {
    pub fn new(ds: &Dataset, z: &TopicAssignments, topics: usize) -> Self {
        let mut topic_word = Array2::zeros((topics, ds.vocab().len()));
        let mut user_topic = Array2::zeros((ds.n_users(), topics));
        for (p, &k) in ds.posts().iter().zip(&z.z) {
            user_topic[[p.author, k]] += 1.0;
            for &w in &p.tokens {
                topic_word[[k, w as usize]] += 1.0;
            }
        }
        SufficientStats { topic_word, user_topic }
    }
}

/// Sampled pairs indexed from both ends.
#[derive(Debug, Clone)]
pub(crate) struct PairIndex {
    pub by_source: Vec<Vec<(UserId, bool)>>,
    pub by_target: Vec<Vec<(UserId, bool)>>,
}

impl PairIndex {
    pub fn new(pairs: &PairSample) -> Self {
        let n = pairs.n_users();
        let mut by_source = vec![Vec::new(); n];
        let mut by_target = vec![Vec::new(); n];
        for (u, v, r) in pairs.iter() {
            by_source[u].push((v, r));
            by_target[v].push((u, r));
        }
        PairIndex { by_source, by_target }
    }
}

// Row objectives: every term of the joint objective that depends on one row,
// up to additive constants. Each returns the value and writes the gradient.

/// Topic `k`: `Σ_w (n_kw + γ - 1) log τ_kw`.
pub(crate) fn tau_row_objective(counts: ArrayView1<f64>, tau: &[f64], gamma: f64, grad: Option<&mut [f64]>) -> f64 {
    if let Some(g) = grad {
        for ((g, &c), &t) in g.iter_mut().zip(counts.iter()).zip(tau) {
            *g = (c + gamma - 1.0) / t;
        }
    }
    counts.iter().zip(tau).map(|(&c, &t)| (c + gamma - 1.0) * ln_floor(t)).sum()
}

/// User `u`'s topic distribution: topic choices, Dirichlet prior, and the
/// Gaussian means of its log-hub `log_hub` and log-authority `log_auth`.
pub(crate) fn theta_row_objective(
    counts: ArrayView1<f64>,
    theta: &[f64],
    log_hub: &[f64],
    log_auth: &[f64],
    hp: &HyperParams,
    grad: Option<&mut [f64]>,
) -> f64 {
    let (d2, s2) = (hp.delta * hp.delta, hp.sigma * hp.sigma);
    let mut value = 0.0;
    for k in 0..theta.len() {
        let (dh, da) = (log_hub[k] - theta[k], log_auth[k] - theta[k]);
        value += (counts[k] + hp.alpha - 1.0) * ln_floor(theta[k]) - dh * dh / (2.0 * d2) - da * da / (2.0 * s2);
    }
    if let Some(g) = grad {
        for k in 0..theta.len() {
            g[k] =
                (counts[k] + hp.alpha - 1.0) / theta[k] + (log_hub[k] - theta[k]) / d2 + (log_auth[k] - theta[k]) / s2;
        }
    }
    value
}

/// Shared body of the hub and authority row objectives: a log-normal prior
/// on `exp(logs)` plus the link terms of `pairs`, where the partner vectors
/// are rows of `partner`.
fn factor_row_objective(
    logs: &[f64],
    theta: ArrayView1<f64>,
    dev: f64,
    pairs: &[(UserId, bool)],
    partner: &Array2<f64>,
    lambda: f64,
    grad: Option<&mut [f64]>,
) -> f64 {
    let k = logs.len();
    let v2 = dev * dev;
    let values: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    let mut value = 0.0;
    for j in 0..k {
        let d = logs[j] - theta[j];
        value += -d * d / (2.0 * v2) - logs[j];
    }
    match grad {
        None => {
            for &(w, r) in pairs {
                let x: f64 = values.iter().zip(partner.row(w)).map(|(a, b)| a * b).sum();
                value += link_ll(r, x, lambda);
            }
        }
        Some(g) => {
            for j in 0..k {
                g[j] = -(logs[j] - theta[j]) / v2 - 1.0;
            }
            for &(w, r) in pairs {
                let row = partner.row(w);
                let x: f64 = values.iter().zip(row).map(|(a, b)| a * b).sum();
                value += link_ll(r, x, lambda);
                let dx = link_dll(r, x, lambda);
                for j in 0..k {
                    g[j] += dx * row[j] * values[j];
                }
            }
        }
    }
    value
}

/// User `u` as a source: log-hub row.
pub(crate) fn hub_row_objective(
    log_hub: &[f64],
    theta: ArrayView1<f64>,
    pairs: &[(UserId, bool)],
    authority: &Array2<f64>,
    hp: &HyperParams,
    grad: Option<&mut [f64]>,
) -> f64 {
    factor_row_objective(log_hub, theta, hp.delta, pairs, authority, hp.lambda, grad)
}

/// User `v` as a target: log-authority row.
pub(crate) fn authority_row_objective(
    log_auth: &[f64],
    theta: ArrayView1<f64>,
    pairs: &[(UserId, bool)],
    hub: &Array2<f64>,
    hp: &HyperParams,
    grad: Option<&mut [f64]>,
) -> f64 {
    factor_row_objective(log_auth, theta, hp.sigma, pairs, hub, hp.lambda, grad)
}

/// Partials of [`joint_log_likelihood`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    pub tau: Array2<f64>,
    pub theta: Array2<f64>,
    pub log_authority: Array2<f64>,
    pub log_hub: Array2<f64>,
}

pub fn gradient(
    train: &Dataset,
    pairs: &PairSample,
    params: &ModelParams,
    z: &TopicAssignments,
    hp: &HyperParams,
) -> ParamGradient {
    let k = params.topics();
    let stats = SufficientStats::new(train, z, k);
    let index = PairIndex::new(pairs);
    let log_hub = params.hub.mapv(f64::ln);
    let log_auth = params.authority.mapv(f64::ln);

    let mut tau = Array2::zeros(params.tau.dim());
    for t in 0..k {
        let row = params.tau.row(t).to_vec();
        let mut g = vec![0.0; row.len()];
        tau_row_objective(stats.topic_word.row(t), &row, hp.gamma, Some(&mut g));
        tau.row_mut(t).assign(&ArrayView1::from(&g));
    }
    let mut theta = Array2::zeros(params.theta.dim());
    let mut lh = Array2::zeros(params.hub.dim());
    let mut la = Array2::zeros(params.authority.dim());
    let mut g = vec![0.0; k];
    for u in 0..params.n_users() {
        let h = log_hub.row(u).to_vec();
        let a = log_auth.row(u).to_vec();
        let th = params.theta.row(u).to_vec();
        theta_row_objective(stats.user_topic.row(u), &th, &h, &a, hp, Some(&mut g));
        theta.row_mut(u).assign(&ArrayView1::from(&g));
        hub_row_objective(&h, params.theta.row(u), &index.by_source[u], &params.authority, hp, Some(&mut g));
        lh.row_mut(u).assign(&ArrayView1::from(&g));
        authority_row_objective(&a, params.theta.row(u), &index.by_target[u], &params.hub, hp, Some(&mut g));
        la.row_mut(u).assign(&ArrayView1::from(&g));
    }
    ParamGradient { tau, theta, log_authority: la, log_hub: lh }
}
