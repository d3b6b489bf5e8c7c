//! Collapsed Gibbs Twitter-LDA: one topic per post drawn from the author's
//! distribution, and a per-token switch between that topic and a shared
//! background distribution.

use ndarray::{Array1, Array2};
use rand::Rng;

use super::lda::LdaConfig;
use crate::corpus::Dataset;
use crate::model::sample_from_logits;
use crate::rng::{stream, Domain, StreamRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TwitterLdaModel {
    /// N × K.
    pub theta: Array2<f64>,
    /// K × W.
    pub tau: Array2<f64>,
    pub background: Array1<f64>,
    /// Probability that a token comes from the post's topic rather than the
    /// background.
    pub pi: f64,
}

/// How the topic-vs-background rate is handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PiPrior {
    /// Beta(a, b) prior; the switch is sampled and `pi` estimated from counts.
    Beta(f64, f64),
    /// Switch fixed at this rate and never resampled; `Fixed(1.0)` disables
    /// the background.
    Fixed(f64),
}

impl Default for PiPrior {
    fn default() -> Self {
        PiPrior::Beta(1.0, 1.0)
    }
}

pub(crate) struct TwitterLdaSampler<'a> {
    cfg: &'a LdaConfig,
    pi_prior: PiPrior,
    train: &'a Dataset,
    /// Topic of each post.
    z: Vec<usize>,
    /// Per token: drawn from the topic (true) or the background.
    y: Vec<Vec<bool>>,
    user_topic: Array2<f64>,
    topic_word: Array2<f64>,
    topic_total: Vec<f64>,
    bg_word: Vec<f64>,
    bg_total: f64,
    /// Topic-token and background-token counts.
    switch: [f64; 2],
    rng: StreamRng,
}

impl<'a> TwitterLdaSampler<'a> {
    pub(crate) fn new(train: &'a Dataset, cfg: &'a LdaConfig, pi_prior: PiPrior) -> Self {
        let (k, w) = (cfg.topics, train.vocab().len());
        let mut init = stream(cfg.seed, Domain::TwitterLda, 0);
        let mut s = TwitterLdaSampler {
            cfg,
            pi_prior,
            train,
            z: Vec::with_capacity(train.posts().len()),
            y: Vec::with_capacity(train.posts().len()),
            user_topic: Array2::zeros((train.n_users(), k)),
            topic_word: Array2::zeros((k, w)),
            topic_total: vec![0.0; k],
            bg_word: vec![0.0; w],
            bg_total: 0.0,
            switch: [0.0; 2],
            rng: stream(cfg.seed, Domain::TwitterLda, 1),
        };
        for (i, post) in train.posts().iter().enumerate() {
            let t = init.random_range(0..k);
            let ys: Vec<bool> = post
                .tokens
                .iter()
                .map(|_| match pi_prior {
                    PiPrior::Fixed(p) => init.random::<f64>() < p,
                    PiPrior::Beta(..) => init.random::<bool>(),
                })
                .collect();
            s.z.push(t);
            s.y.push(ys);
            s.add_post(i, 1.0);
        }
        s
    }

    fn add_post(&mut self, i: usize, delta: f64) {
        let train = self.train;
        let post = &train.posts()[i];
        let t = self.z[i];
        self.user_topic[[post.author, t]] += delta;
        for j in 0..post.tokens.len() {
            self.add_token(t, post.tokens[j] as usize, self.y[i][j], delta);
        }
    }

    fn add_token(&mut self, t: usize, w: usize, from_topic: bool, delta: f64) {
        if from_topic {
            self.topic_word[[t, w]] += delta;
            self.topic_total[t] += delta;
            self.switch[0] += delta;
        } else {
            self.bg_word[w] += delta;
            self.bg_total += delta;
            self.switch[1] += delta;
        }
    }

    pub(crate) fn sweep(&mut self) {
        let (k, w_gamma) = (self.cfg.topics, self.topic_word.ncols() as f64 * self.cfg.gamma);
        let gamma = self.cfg.gamma;
        let mut logits = vec![0.0; k];
        let train = self.train;
        for i in 0..self.z.len() {
            let post = &train.posts()[i];

            // Post topic given the switches; topic tokens of the post enter
            // the collapsed likelihood one at a time.
            self.add_post(i, -1.0);
            for (t, l) in logits.iter_mut().enumerate() {
                let mut acc = (self.user_topic[[post.author, t]] + self.cfg.alpha).ln();
                let mut seen: Vec<(usize, f64)> = Vec::new();
                let mut n = 0.0;
                for (&w, &from_topic) in post.tokens.iter().zip(&self.y[i]) {
                    if !from_topic {
                        continue;
                    }
                    let w = w as usize;
                    let prior = match seen.iter_mut().find(|(v, _)| *v == w) {
                        Some((_, c)) => {
                            *c += 1.0;
                            *c - 1.0
                        }
                        None => {
                            seen.push((w, 1.0));
                            0.0
                        }
                    };
                    acc += (self.topic_word[[t, w]] + gamma + prior).ln() - (self.topic_total[t] + w_gamma + n).ln();
                    n += 1.0;
                }
                *l = acc;
            }
            self.z[i] = sample_from_logits(&mut self.rng, &mut logits);
            self.add_post(i, 1.0);

            let PiPrior::Beta(a, b) = self.pi_prior else {
                continue;
            };
            let t = self.z[i];
            for j in 0..post.tokens.len() {
                let w = post.tokens[j] as usize;
                self.add_token(t, w, self.y[i][j], -1.0);
                let p_topic =
                    (self.switch[0] + a) * (self.topic_word[[t, w]] + gamma) / (self.topic_total[t] + w_gamma);
                let p_bg = (self.switch[1] + b) * (self.bg_word[w] + gamma) / (self.bg_total + w_gamma);
                let from_topic = self.rng.random::<f64>() * (p_topic + p_bg) < p_topic;
                self.y[i][j] = from_topic;
                self.add_token(t, w, from_topic, 1.0);
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn caches_match_recount(&self) -> bool {
        let mut fresh = TwitterLdaSampler {
            user_topic: Array2::zeros(self.user_topic.dim()),
            topic_word: Array2::zeros(self.topic_word.dim()),
            topic_total: vec![0.0; self.topic_total.len()],
            bg_word: vec![0.0; self.bg_word.len()],
            bg_total: 0.0,
            switch: [0.0; 2],
            z: self.z.clone(),
            y: self.y.clone(),
            rng: stream(0, Domain::TwitterLda, 0),
            ..*self
        };
        for i in 0..fresh.z.len() {
            fresh.add_post(i, 1.0);
        }
        fresh.user_topic == self.user_topic
            && fresh.topic_word == self.topic_word
            && fresh.topic_total == self.topic_total
            && fresh.bg_word == self.bg_word
            && fresh.bg_total == self.bg_total
            && fresh.switch == self.switch
    }

    #[cfg(test)]
    pub(crate) fn post_topics(&self) -> &[usize] {
        &self.z
    }

    pub(crate) fn estimate(&self) -> TwitterLdaModel {
        let (k, w) = self.topic_word.dim();
        let (alpha, gamma) = (self.cfg.alpha, self.cfg.gamma);
        let mut theta = self.user_topic.clone();
        for mut row in theta.rows_mut() {
            let total = row.sum() + k as f64 * alpha;
            row.mapv_inplace(|c| (c + alpha) / total);
        }
        let mut tau = self.topic_word.clone();
        for (t, mut row) in tau.rows_mut().into_iter().enumerate() {
            let total = self.topic_total[t] + w as f64 * gamma;
            row.mapv_inplace(|c| (c + gamma) / total);
        }
        let bg_norm = self.bg_total + w as f64 * gamma;
        let background = self.bg_word.iter().map(|c| (c + gamma) / bg_norm).collect();
        let pi = match self.pi_prior {
            PiPrior::Fixed(p) => p,
            PiPrior::Beta(a, b) => (self.switch[0] + a) / (self.switch[0] + self.switch[1] + a + b),
        };
        TwitterLdaModel { theta, tau, background, pi }
    }
}

pub fn fit_twitter_lda(train: &Dataset, cfg: &LdaConfig, pi_prior: PiPrior) -> Result<TwitterLdaModel> {
    cfg.validate()?;
    match pi_prior {
        PiPrior::Beta(a, b) if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => {}
        PiPrior::Fixed(p) if (0.0..=1.0).contains(&p) => {}
        other => return Err(Error::InvalidArgument(format!("invalid switch prior {other:?}"))),
    }
    let mut s = TwitterLdaSampler::new(train, cfg, pi_prior);
    for _ in 0..cfg.iters {
        s.sweep();
    }
    Ok(s.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::test_support::{corpus, two_block_corpus};
    use crate::corpus::{FollowGraph, Post, Vocabulary};
    use approx::assert_abs_diff_eq;
    use statrs::function::gamma::ln_gamma;

    fn cfg(topics: usize, iters: usize, seed: u64) -> LdaConfig {
        LdaConfig { topics, alpha: 0.5, gamma: 0.1, iters, seed }
    }

    #[test]
    fn single_topic_without_background_is_smoothed_frequency() {
        let ds = corpus(&[&[0, 0, 1], &[2, 0]], 4);
        let m = fit_twitter_lda(&ds, &cfg(1, 5, 1), PiPrior::Fixed(1.0)).unwrap();
        assert!(m.theta.iter().all(|&x| x == 1.0));
        let counts = [3.0, 1.0, 1.0, 0.0];
        for (w, c) in counts.iter().enumerate() {
            assert_abs_diff_eq!(m.tau[[0, w]], (c + 0.1) / (5.0 + 0.4), epsilon = 1e-15);
        }
        assert_eq!(m.pi, 1.0);
    }

    /// Exact posterior over post topics of the single-topic-per-document
    /// model with one post per user, by enumerating all assignments.
    fn enumerate_posterior(docs: &[&[u32]], k: usize, w: usize, gamma: f64) -> Vec<f64> {
        let states = k.pow(docs.len() as u32);
        let mut logp = Vec::with_capacity(states);
        for s in 0..states {
            let z: Vec<usize> = (0..docs.len()).map(|d| (s / k.pow(d as u32)) % k).collect();
            let mut counts = vec![vec![0.0; w]; k];
            for (doc, &t) in docs.iter().zip(&z) {
                for &x in doc.iter() {
                    counts[t][x as usize] += 1.0;
                }
            }
            // With one post per user the symmetric topic prior is flat over z.
            let mut lp = 0.0;
            for row in &counts {
                let n: f64 = row.iter().sum();
                lp += ln_gamma(w as f64 * gamma) - ln_gamma(n + w as f64 * gamma);
                lp += row.iter().map(|c| ln_gamma(c + gamma) - ln_gamma(gamma)).sum::<f64>();
            }
            logp.push(lp);
        }
        let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logp.iter().map(|l| (l - max).exp()).sum();
        logp.iter().map(|l| (l - max).exp() / total).collect()
    }

    #[test]
    fn without_background_reduces_to_single_topic_documents() {
        let docs: [&[u32]; 3] = [&[0, 0, 1], &[1, 2], &[2, 2, 0]];
        let (k, w, gamma) = (2, 3, 0.1);
        let ds = corpus(&docs, w);
        let exact = enumerate_posterior(&docs, k, w, gamma);
        let runs = 4000;
        let mut freq = vec![0.0; exact.len()];
        let c = LdaConfig { topics: k, alpha: 0.5, gamma, iters: 10, seed: 0 };
        for seed in 0..runs {
            let c = LdaConfig { seed, ..c.clone() };
            let mut s = TwitterLdaSampler::new(&ds, &c, PiPrior::Fixed(1.0));
            for _ in 0..c.iters {
                s.sweep();
            }
            let z = s.post_topics();
            let state: usize = z.iter().enumerate().map(|(d, &t)| t * k.pow(d as u32)).sum();
            freq[state] += 1.0 / runs as f64;
            // theta is the smoothed one-post count of the reduction.
            let m = s.estimate();
            for (u, &t) in z.iter().enumerate() {
                for j in 0..k {
                    let expect = ((j == t) as u8 as f64 + 0.5) / (1.0 + k as f64 * 0.5);
                    assert_abs_diff_eq!(m.theta[[u, j]], expect, epsilon = 1e-15);
                }
            }
        }
        for (f, p) in freq.iter().zip(&exact) {
            assert!((f - p).abs() < 0.03, "{freq:?} vs {exact:?}");
        }
    }

    #[test]
    fn planted_stop_word_goes_to_background() {
        // Word 0 appears in every post; the rest split into two topics.
        let w = 11;
        let mut posts = Vec::new();
        for u in 0..20 {
            for p in 0..6 {
                let block = if (u + p) % 2 == 0 { 1 } else { 6 };
                let mut tokens = vec![0];
                tokens.extend((0..5).map(|i| block + ((u * 7 + p * 3 + i) % 5) as u32));
                posts.push(Post { author: u, tokens });
            }
        }
        let vocab = Vocabulary::from_words((0..w).map(|i| format!("w{i}")).collect()).unwrap();
        let users = (0..20).map(|u| format!("u{u}")).collect();
        let ds = Dataset::new(users, FollowGraph::empty(20), posts, vocab).unwrap();
        let m = fit_twitter_lda(&ds, &cfg(2, 200, 3), PiPrior::default()).unwrap();
        for t in 0..2 {
            assert!(m.background[0] > m.tau[[t, 0]], "{} vs {}", m.background[0], m.tau[[t, 0]]);
        }
        assert!(m.pi > 0.0 && m.pi < 1.0);
    }

    #[test]
    fn count_caches_stay_consistent() {
        let ds = two_block_corpus(4, 10);
        let c = cfg(3, 0, 9);
        let mut s = TwitterLdaSampler::new(&ds, &c, PiPrior::default());
        assert!(s.caches_match_recount());
        for _ in 0..5 {
            s.sweep();
            assert!(s.caches_match_recount());
        }
    }

    #[test]
    fn deterministic_and_stochastic_rows() {
        let ds = two_block_corpus(5, 10);
        let a = fit_twitter_lda(&ds, &cfg(2, 10, 1), PiPrior::default()).unwrap();
        assert_eq!(a, fit_twitter_lda(&ds, &cfg(2, 10, 1), PiPrior::default()).unwrap());
        for row in a.theta.rows().into_iter().chain(a.tau.rows()) {
            assert_abs_diff_eq!(row.sum(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(a.background.sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_switch_prior_is_rejected() {
        let ds = two_block_corpus(5, 10);
        assert!(fit_twitter_lda(&ds, &cfg(2, 1, 1), PiPrior::Fixed(1.5)).is_err());
        assert!(fit_twitter_lda(&ds, &cfg(2, 1, 1), PiPrior::Beta(0.0, 1.0)).is_err());
    }
}
