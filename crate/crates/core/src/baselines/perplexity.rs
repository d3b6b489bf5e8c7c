//! Held-out perplexity for the topic models.

use crate::corpus::Post;
use crate::model::{ModelParams, PROB_FLOOR};
use crate::{Error, Result};

use super::{LdaModel, TwitterLdaModel};

/// A fitted topic model.
#[derive(Debug, Clone, Copy)]
pub enum TopicModel<'a> {
    Hat(&'a ModelParams),
    Lda(&'a LdaModel),
    TwitterLda(&'a TwitterLdaModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perplexity {
    pub value: f64,
    pub scored_tokens: usize,
    /// Tokens whose word id lies outside the model's vocabulary.
    pub skipped_tokens: usize,
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn ln(p: f64) -> f64 {
    p.max(PROB_FLOOR).ln()
}

/// `exp(-Σ log p(w) / #tokens)`. For the single-topic-per-post models (HAT,
/// Twitter-LDA) a post's likelihood marginalizes its topic,
/// `p(post) = Σ_k θ_{u,k} Π_n p_k(w_n)`; for LDA every token is an
/// independent mixture `Σ_k θ_{u,k} τ_{k,w}`.
pub fn perplexity(model: TopicModel<'_>, test_posts: &[Post]) -> Result<Perplexity> {
    let (theta, tau) = match model {
        TopicModel::Hat(m) => (&m.theta, &m.tau),
        TopicModel::Lda(m) => (&m.theta, &m.tau),
        TopicModel::TwitterLda(m) => (&m.theta, &m.tau),
    };
    let (k, w) = tau.dim();
    let mut total = 0.0;
    let (mut scored, mut skipped) = (0, 0);
    for post in test_posts {
        if post.author >= theta.nrows() {
            return Err(Error::DimensionMismatch { expected: theta.nrows(), actual: post.author + 1 });
        }
        let tokens: Vec<usize> = post.tokens.iter().map(|&t| t as usize).filter(|&t| t < w).collect();
        skipped += post.tokens.len() - tokens.len();
        if tokens.is_empty() {
            continue;
        }
        scored += tokens.len();
        let theta_u = theta.row(post.author);
        total += match model {
            TopicModel::Lda(_) => {
                tokens.iter().map(|&x| ln((0..k).map(|t| theta_u[t] * tau[[t, x]]).sum())).sum::<f64>()
            }
            TopicModel::Hat(_) => {
                let per_topic: Vec<f64> =
                    (0..k).map(|t| ln(theta_u[t]) + tokens.iter().map(|&x| ln(tau[[t, x]])).sum::<f64>()).collect();
                log_sum_exp(&per_topic)
            }
            TopicModel::TwitterLda(m) => {
                let per_topic: Vec<f64> = (0..k)
                    .map(|t| {
                        ln(theta_u[t])
                            + tokens
                                .iter()
                                .map(|&x| ln(m.pi * tau[[t, x]] + (1.0 - m.pi) * m.background[x]))
                                .sum::<f64>()
                    })
                    .collect();
                log_sum_exp(&per_topic)
            }
        };
    }
    if scored == 0 {
        return Err(Error::NoTokens);
    }
    Ok(Perplexity { value: (-total / scored as f64).exp(), scored_tokens: scored, skipped_tokens: skipped })
}
