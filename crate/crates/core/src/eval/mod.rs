//! Link scoring, candidate ranking, ranking metrics and per-topic reports.

mod report;

use rayon::prelude::*;

use crate::baselines::HitsScores;
use crate::corpus::{two_hop_candidates, TrainTestSplit, UserId};
use crate::model::ModelParams;
use crate::{Error, Result};

pub use report::{topic_report, TopicEntry, TopicReport};

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(())
}

/// `Σ_k H_{u,k} A_{v,k}`.
pub fn score_hat(hub: &[f64], authority: &[f64]) -> Result<f64> {
    check_dims(hub, authority)?;
    Ok(hub.iter().zip(authority).map(|(h, a)| h * a).sum())
}

/// `h_u a_v`.
pub fn score_hits(hub: f64, authority: f64) -> f64 {
    hub * authority
}

/// `Σ_k θ_{u,k} θ_{v,k}`.
pub fn score_interest(theta_u: &[f64], theta_v: &[f64]) -> Result<f64> {
    check_dims(theta_u, theta_v)?;
    Ok(theta_u.iter().zip(theta_v).map(|(a, b)| a * b).sum())
}

/// Scores a directed pair `(source, target)` from a fitted model.
pub trait LinkScorer: Sync {
    fn n_users(&self) -> usize;
    fn score(&self, source: UserId, target: UserId) -> f64;
}

pub struct HatScorer<'a>(pub &'a ModelParams);

impl LinkScorer for HatScorer<'_> {
    fn n_users(&self) -> usize {
        self.0.n_users()
    }

    fn score(&self, u: UserId, v: UserId) -> f64 {
        self.0.hub.row(u).dot(&self.0.authority.row(v))
    }
}

pub struct HitsScorer<'a>(pub &'a HitsScores);

impl LinkScorer for HitsScorer<'_> {
    fn n_users(&self) -> usize {
        self.0.hub.len()
    }

    fn score(&self, u: UserId, v: UserId) -> f64 {
        score_hits(self.0.hub[u], self.0.authority[v])
    }
}

/// Shared-interest scorer over any N × K topic distribution.
pub struct InterestScorer<'a>(pub &'a ndarray::Array2<f64>);

impl LinkScorer for InterestScorer<'_> {
    fn n_users(&self) -> usize {
        self.0.nrows()
    }

    fn score(&self, u: UserId, v: UserId) -> f64 {
        self.0.row(u).dot(&self.0.row(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub source: UserId,
    pub target: UserId,
    pub score: f64,
    /// Held-out link.
    pub relevant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRanking {
    pub source: UserId,
    /// Descending score, ties by ascending target.
    pub candidates: Vec<Candidate>,
}

impl UserRanking {
    pub fn new(source: UserId, mut candidates: Vec<Candidate>) -> Self {
        candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.target.cmp(&b.target)));
        UserRanking { source, candidates }
    }

    pub fn n_relevant(&self) -> usize {
        self.candidates.iter().filter(|c| c.relevant).count()
    }

    /// 1-based rank of the best-ranked relevant candidate.
    pub fn first_relevant_rank(&self) -> Option<usize> {
        self.candidates.iter().position(|c| c.relevant).map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankingResult {
    /// In ascending source order.
    pub users: Vec<UserRanking>,
    /// Users with held-out links but no candidates.
    pub skipped: usize,
}

/// Ranks, for every user with at least one held-out link, those links
/// together with the user's 2-hop non-links in the training graph.
pub fn rank_candidates(split: &TrainTestSplit, scorer: &dyn LinkScorer) -> Result<RankingResult> {
    let n = split.train.n_users();
    if scorer.n_users() != n {
        return Err(Error::Incompatible(format!("model has {} users, dataset has {n}", scorer.n_users())));
    }
    let graph = split.train.graph();
    let per_user: Vec<Option<UserRanking>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let positives = &split.test_links[u];
            if positives.is_empty() {
                return None;
            }
            let mut cands: Vec<Candidate> = positives
                .iter()
                .map(|&v| Candidate { source: u, target: v, score: scorer.score(u, v), relevant: true })
                .collect();
            cands.extend(
                two_hop_candidates(graph, u)
                    .into_iter()
                    .filter(|v| positives.binary_search(v).is_err())
                    .map(|v| Candidate { source: u, target: v, score: scorer.score(u, v), relevant: false }),
            );
            Some(UserRanking::new(u, cands))
        })
        .collect();
    let mut result = RankingResult::default();
    for r in per_user.into_iter().flatten() {
        if r.candidates.is_empty() {
            result.skipped += 1;
        } else {
            result.users.push(r);
        }
    }
    Ok(result)
}

/// `#{users with ≥ k relevant candidates and one of them in the top k} /
/// #{users with ≥ k relevant candidates}`; `None` when no user has `k`
/// relevant candidates.
pub fn precision_at_k(results: &RankingResult, k: usize) -> Option<f64> {
    if k == 0 {
        return None;
    }
    let eligible: Vec<&UserRanking> = results.users.iter().filter(|u| u.n_relevant() >= k).collect();
    if eligible.is_empty() {
        return None;
    }
    let hits = eligible.iter().filter(|u| u.first_relevant_rank().is_some_and(|r| r <= k)).count();
    Some(hits as f64 / eligible.len() as f64)
}

/// Mean reciprocal rank of the first relevant candidate, over users with at
/// least one relevant candidate.
pub fn mrr(results: &RankingResult) -> Option<f64> {
    let ranks: Vec<usize> = results.users.iter().filter_map(UserRanking::first_relevant_rank).collect();
    if ranks.is_empty() {
        return None;
    }
    Some(ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
}

/// `method<TAB>k<TAB>value` rows for each `k`, then `method<TAB>mrr<TAB>value`.
/// Undefined values are written as `NA`.
pub fn metrics_tsv(method: &str, results: &RankingResult, ks: impl IntoIterator<Item = usize>) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x}"));
    let mut out = String::new();
    for k in ks {
        out.push_str(&format!("{method}\t{k}\t{}\n", fmt(precision_at_k(results, k))));
    }
    out.push_str(&format!("{method}\tmrr\t{}\n", fmt(mrr(results))));
    out
}
