//! Forward sampling of a synthetic social network from the HAT generative
//! process.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{link_probability, sample_categorical, sample_dirichlet, HyperParams, ModelParams, TopicAssignments};
use crate::corpus::{Dataset, FollowGraph, Post, Vocabulary};
use crate::rng::{stream, Domain};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateConfig {
    pub n_users: usize,
    pub posts_per_user: usize,
    pub words_per_post: usize,
    pub vocab_size: usize,
    pub seed: u64,
    /// Draw links with mean `1 - f(H_u·A_v)` instead of `f(H_u·A_v)`.
    pub complement_link_mean: bool,
}

impl GenerateConfig {
    pub fn new(n_users: usize, posts_per_user: usize, words_per_post: usize, vocab_size: usize, seed: u64) -> Self {
        GenerateConfig { n_users, posts_per_user, words_per_post, vocab_size, seed, complement_link_mean: false }
    }
}

/// A sampled dataset together with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: Dataset,
    pub params: ModelParams,
    pub assignments: TopicAssignments,
}

pub fn generate(hp: &HyperParams, cfg: &GenerateConfig) -> Result<Generated> {
    hp.validate()?;
    if cfg.n_users == 0 || cfg.posts_per_user == 0 || cfg.words_per_post == 0 || cfg.vocab_size == 0 {
        return Err(Error::InvalidArgument("generator counts must be at least 1".into()));
    }
    let (k, n, w) = (hp.topics, cfg.n_users, cfg.vocab_size);
    let mut rng = stream(cfg.seed, Domain::Generate, 0);

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
            let mean = theta[[u, t]];
            let x: f64 = Normal::new(mean, hp.delta).expect("positive delta").sample(&mut rng);
            hub[[u, t]] = x.exp();
            let x: f64 = Normal::new(mean, hp.sigma).expect("positive sigma").sample(&mut rng);
            authority[[u, t]] = x.exp();
        }
    }

    let mut posts = Vec::with_capacity(n * cfg.posts_per_user);
    let mut z = Vec::with_capacity(n * cfg.posts_per_user);
    for u in 0..n {
        let theta_u = theta.row(u).to_vec();
        for _ in 0..cfg.posts_per_user {
            let topic = sample_categorical(&mut rng, &theta_u);
            let words = tau.row(topic);
            let words = words.as_slice().expect("standard layout");
            let tokens = (0..cfg.words_per_post).map(|_| sample_categorical(&mut rng, words) as u32).collect();
            posts.push(Post { author: u, tokens });
            z.push(topic);
        }
    }

    let mut edges = Vec::new();
    for u in 0..n {
        let hub_u = hub.row(u).to_vec();
        for v in 0..n {
            if u == v {
                continue;
            }
            let auth_v = authority.row(v).to_vec();
            let mut q = link_probability(&hub_u, &auth_v, hp.lambda)?;
            if cfg.complement_link_mean {
                q = 1.0 - q;
            }
            if rng.random::<f64>() < q {
                edges.push((u, v));
            }
        }
    }

    let users = (0..n).map(|u| format!("u{u}")).collect();
    let vocab = Vocabulary::from_words((0..w).map(|i| format!("w{i}")).collect())?;
    let dataset = Dataset::new(users, FollowGraph::from_edges(n, edges)?, posts, vocab)?;
    Ok(Generated { dataset, params: ModelParams { tau, theta, authority, hub }, assignments: TopicAssignments { z } })
}
