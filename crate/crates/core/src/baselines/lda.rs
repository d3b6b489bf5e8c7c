//! Collapsed Gibbs LDA with one document per user.

use ndarray::Array2;
use rand::Rng;

use crate::corpus::Dataset;
use crate::model::sample_categorical;
use crate::rng::{stream, Domain};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// N × K.
    pub theta: Array2<f64>,
    /// K × W.
    pub tau: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub iters: usize,
    pub seed: u64,
}

impl LdaConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::InvalidArgument("topic count must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.gamma > 0.0 && self.alpha.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument("Dirichlet priors must be positive".into()));
        }
        Ok(())
    }
}

/// Token-level sampler state; a document is the concatenation of one user's
/// posts.
pub(crate) struct LdaSampler<'a> {
    cfg: &'a LdaConfig,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<usize>>,
    doc_topic: Array2<f64>,
    topic_word: Array2<f64>,
    topic_total: Vec<f64>,
    rng: crate::rng::StreamRng,
}

impl<'a> LdaSampler<'a> {
    pub(crate) fn new(train: &Dataset, cfg: &'a LdaConfig) -> Self {
        let (k, w) = (cfg.topics, train.vocab().len());
        let docs: Vec<Vec<u32>> = (0..train.n_users())
            .map(|u| train.posts_of(u).iter().flat_map(|p| p.tokens.iter().copied()).collect())
            .collect();
        let mut rng = stream(cfg.seed, Domain::Lda, 0);
        let mut s = LdaSampler {
            cfg,
            z: Vec::with_capacity(docs.len()),
            doc_topic: Array2::zeros((docs.len(), k)),
            topic_word: Array2::zeros((k, w)),
            topic_total: vec![0.0; k],
            docs: Vec::new(),
            rng: stream(cfg.seed, Domain::Lda, 1),
        };
        for (d, doc) in docs.iter().enumerate() {
            let zs: Vec<usize> = doc.iter().map(|_| rng.random_range(0..k)).collect();
            for (&w, &t) in doc.iter().zip(&zs) {
                s.add(d, w, t, 1.0);
            }
            s.z.push(zs);
        }
        s.docs = docs;
        s
    }

    fn add(&mut self, d: usize, w: u32, t: usize, delta: f64) {
        self.doc_topic[[d, t]] += delta;
        self.topic_word[[t, w as usize]] += delta;
        self.topic_total[t] += delta;
    }

    pub(crate) fn sweep(&mut self) {
        let (k, w_gamma) = (self.cfg.topics, self.topic_word.ncols() as f64 * self.cfg.gamma);
        let mut weights = vec![0.0; k];
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let (w, old) = (self.docs[d][i], self.z[d][i]);
                self.add(d, w, old, -1.0);
                for (t, p) in weights.iter_mut().enumerate() {
                    *p = (self.doc_topic[[d, t]] + self.cfg.alpha)
                        * (self.topic_word[[t, w as usize]] + self.cfg.gamma)
                        / (self.topic_total[t] + w_gamma);
                }
                let new = sample_categorical(&mut self.rng, &weights);
                self.add(d, w, new, 1.0);
                self.z[d][i] = new;
            }
        }
    }

    #[cfg(test)]
    fn caches_match_recount(&self) -> bool {
        let mut other = Array2::<f64>::zeros(self.topic_word.dim());
        let mut dt = Array2::<f64>::zeros(self.doc_topic.dim());
        for (d, doc) in self.docs.iter().enumerate() {
            for (&w, &t) in doc.iter().zip(&self.z[d]) {
                other[[t, w as usize]] += 1.0;
                dt[[d, t]] += 1.0;
            }
        }
        let totals: Vec<f64> = other.rows().into_iter().map(|r| r.sum()).collect();
        other == self.topic_word && dt == self.doc_topic && totals == self.topic_total
    }

    pub(crate) fn estimate(&self) -> LdaModel {
        let (k, w) = self.topic_word.dim();
        let (alpha, gamma) = (self.cfg.alpha, self.cfg.gamma);
        let mut theta = self.doc_topic.clone();
        for mut row in theta.rows_mut() {
            let total = row.sum() + k as f64 * alpha;
            row.mapv_inplace(|c| (c + alpha) / total);
        }
        let mut tau = self.topic_word.clone();
        for (t, mut row) in tau.rows_mut().into_iter().enumerate() {
            let total = self.topic_total[t] + w as f64 * gamma;
            row.mapv_inplace(|c| (c + gamma) / total);
        }
        LdaModel { theta, tau }
    }
}

/// `cfg.iters` collapsed Gibbs sweeps, then posterior-mean estimates
/// `theta = (n_dk + alpha) / (n_d + K alpha)` and
/// `tau = (n_kw + gamma) / (n_k + W gamma)` from the final counts.
pub fn fit_lda(train: &Dataset, cfg: &LdaConfig) -> Result<LdaModel> {
    cfg.validate()?;
    let mut s = LdaSampler::new(train, cfg);
    for _ in 0..cfg.iters {
        s.sweep();
    }
    Ok(s.estimate())
}
