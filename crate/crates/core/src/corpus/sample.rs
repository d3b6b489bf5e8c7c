use rand::seq::SliceRandom;

use super::{Dataset, FollowGraph, Post, UserId};
use crate::rng::{stream, Domain};
use crate::{Error, Result};

/// `ceil(fraction * count)`, guarding against float noise on exact products.
fn ceil_share(fraction: f64, count: usize) -> usize {
    let x = fraction * count as f64;
    ((x - 1e-9).ceil().max(0.0) as usize).min(count)
}

/// Per-user train/test partition of posts and out-links.
#[derive(Debug, Clone)]
pub struct TrainTestSplit {
    pub train: Dataset,
    /// Held-out followees per follower, sorted.
    pub test_links: Vec<Vec<UserId>>,
    /// Held-out posts, grouped by author.
    pub test_posts: Vec<Post>,
    pub fraction: f64,
    pub seed: u64,
}

impl TrainTestSplit {
    pub fn test_edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.test_links.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn n_test_links(&self) -> usize {
        self.test_links.iter().map(Vec::len).sum()
    }
}

/// Sends `ceil(fraction * n)` of each user's posts and of each user's
/// out-links to the training side, the rest to the test side.
pub fn split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<TrainTestSplit> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("split fraction {fraction} not in (0, 1]")));
    }
    let n = dataset.n_users();
    let mut train_posts = Vec::new();
    let mut test_posts = Vec::new();
    let mut train_edges = Vec::new();
    let mut test_links = vec![Vec::new(); n];

    #[allow(clippy::needless_range_loop)]
    for u in 0..n {
        let posts = dataset.posts_of(u);
        let mut order: Vec<usize> = (0..posts.len()).collect();
        order.shuffle(&mut stream(seed, Domain::SplitPosts, u as u64));
        let (train, test) = order.split_at_mut(ceil_share(fraction, posts.len()));
        train.sort_unstable();
        test.sort_unstable();
        train_posts.extend(train.iter().map(|&i| posts[i].clone()));
        test_posts.extend(test.iter().map(|&i| posts[i].clone()));

        let mut followees = dataset.graph().followees(u).to_vec();
        followees.shuffle(&mut stream(seed, Domain::SplitLinks, u as u64));
        let (train, test) = followees.split_at_mut(ceil_share(fraction, dataset.graph().followees(u).len()));
        train_edges.extend(train.iter().map(|&v| (u, v)));
        test.sort_unstable();
        test_links[u] = test.to_vec();
    }

    let graph = FollowGraph::from_edges(n, train_edges)?;
    let train = Dataset::new(dataset.users().to_vec(), graph, train_posts, dataset.vocab().clone())?;
    Ok(TrainTestSplit { train, test_links, test_posts, fraction, seed })
}

/// Followees of `u`'s followees that `u` does not already follow, excluding
/// `u` itself. Sorted ascending.
pub fn two_hop_candidates(graph: &FollowGraph, u: UserId) -> Vec<UserId> {
    let mut out: Vec<UserId> = graph
        .followees(u)
        .iter()
        .flat_map(|&v| graph.followees(v).iter().copied())
        .filter(|&w| w != u && !graph.has_edge(u, w))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Training pairs: every out-link, plus a sample of 2-hop non-links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSample {
    /// `positives[u]`: all followees of `u`.
    pub positives: Vec<Vec<UserId>>,
    /// `negatives[u]`: retained 2-hop non-links of `u`, sorted.
    pub negatives: Vec<Vec<UserId>>,
}

impl PairSample {
    pub fn n_users(&self) -> usize {
        self.positives.len()
    }

    pub fn n_pairs(&self) -> usize {
        self.positives.iter().chain(&self.negatives).map(Vec::len).sum()
    }

    /// `(source, target, linked)` triples, positives of each source first.
    pub fn iter(&self) -> impl Iterator<Item = (UserId, UserId, bool)> + '_ {
        (0..self.n_users()).flat_map(move |u| {
            let pos = self.positives[u].iter().map(move |&v| (u, v, true));
            let neg = self.negatives[u].iter().map(move |&v| (u, v, false));
            pos.chain(neg)
        })
    }
}

/// Keeps all out-links and a uniform `ceil(p/100 * |C_u|)`-subset of each
/// user's 2-hop candidates `C_u`.
pub fn subsample_pairs(graph: &FollowGraph, p: f64, seed: u64) -> Result<PairSample> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("sub-sample percentage {p} not in [0, 100]")));
    }
    let n = graph.n_users();
    let positives = (0..n).map(|u| graph.followees(u).to_vec()).collect();
    let negatives = (0..n)
        .map(|u| {
            let cands = two_hop_candidates(graph, u);
            let keep = ceil_share(p / 100.0, cands.len());
            let mut rng = stream(seed, Domain::Subsample, u as u64);
            let mut chosen: Vec<UserId> =
                rand::seq::index::sample(&mut rng, cands.len(), keep).into_iter().map(|i| cands[i]).collect();
            chosen.sort_unstable();
            chosen
        })
        .collect();
    Ok(PairSample { positives, negatives })
}

#[cfg(test)]
mod tests {
    use super::super::Vocabulary;
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> FollowGraph {
        FollowGraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn dataset(posts_per_user: &[usize], edges: &[(usize, usize)]) -> Dataset {
        let n = posts_per_user.len();
        let vocab = Vocabulary::from_words(vec!["w".into(), "v".into()]).unwrap();
        let mut posts = Vec::new();
        for (u, &c) in posts_per_user.iter().enumerate() {
            for i in 0..c {
                posts.push(Post { author: u, tokens: vec![(i % 2) as u32; i + 1] });
            }
        }
        let users = (0..n).map(|u| format!("u{u}")).collect();
        Dataset::new(users, graph(n, edges), posts, vocab).unwrap()
    }

    #[test]
    fn two_hop_on_chain() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(two_hop_candidates(&g, 0), vec![2]);
        assert!(two_hop_candidates(&g, 2).is_empty());
    }

    #[test]
    fn two_hop_on_complete_triangle_is_empty() {
        let g = graph(3, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]);
        for u in 0..3 {
            assert!(two_hop_candidates(&g, u).is_empty());
        }
    }

    #[test]
    fn split_counts_per_user() {
        let ds = dataset(&[4, 1, 1], &[(0, 1), (0, 2)]);
        let s = split(&ds, 0.5, 9).unwrap();
        assert_eq!(s.train.posts_of(0).len(), 2);
        assert_eq!(s.test_posts.iter().filter(|p| p.author == 0).count(), 2);
        assert_eq!(s.train.graph().followees(0).len(), 1);
        assert_eq!(s.test_links[0].len(), 1);
        // a single post stays on the train side
        assert_eq!(s.train.posts_of(1).len(), 1);
    }

    #[test]
    fn full_fraction_leaves_test_empty() {
        let ds = dataset(&[3, 2], &[(0, 1), (1, 0)]);
        let s = split(&ds, 1.0, 1).unwrap();
        assert!(s.test_posts.is_empty());
        assert_eq!(s.n_test_links(), 0);
        assert_eq!(s.train, ds);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = dataset(&[5, 7, 3], &[(0, 1), (0, 2), (1, 2), (2, 0)]);
        let a = split(&ds, 0.5, 42).unwrap();
        let b = split(&ds, 0.5, 42).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test_links, b.test_links);
        assert_eq!(a.test_posts, b.test_posts);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let ds = dataset(&[1], &[]);
        assert!(split(&ds, 0.0, 0).is_err());
        assert!(split(&ds, 1.5, 0).is_err());
    }

    #[test]
    fn subsample_boundaries() {
        let g = graph(4, &[(0, 1), (1, 2), (1, 3)]);
        let all = subsample_pairs(&g, 100.0, 3).unwrap();
        assert_eq!(all.negatives[0], vec![2, 3]);
        let none = subsample_pairs(&g, 0.0, 3).unwrap();
        assert!(none.negatives.iter().all(Vec::is_empty));
        assert_eq!(none.positives[1], vec![2, 3]);
        let half = subsample_pairs(&g, 50.0, 3).unwrap();
        assert_eq!(half.negatives[0].len(), 1);
        assert!([2, 3].contains(&half.negatives[0][0]));
        assert!(subsample_pairs(&g, 101.0, 0).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = FollowGraph> {
        (2usize..12).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..40)
                .prop_map(move |es| FollowGraph::from_edges(n, es.into_iter().filter(|(a, b)| a != b)).unwrap())
        })
    }

    proptest! {
        #[test]
        fn two_hop_never_contains_self_or_followees(g in arb_graph()) {
            for u in 0..g.n_users() {
                for w in two_hop_candidates(&g, u) {
                    prop_assert!(w != u);
                    prop_assert!(!g.has_edge(u, w));
                    prop_assert!(g.followees(u).iter().any(|&v| g.has_edge(v, w)));
                }
            }
        }

        #[test]
        fn negatives_are_two_hop_non_links(g in arb_graph(), p in 0.0f64..=100.0, seed in any::<u64>()) {
            let s = subsample_pairs(&g, p, seed).unwrap();
            for u in 0..g.n_users() {
                let cands = two_hop_candidates(&g, u);
                prop_assert_eq!(s.negatives[u].len(), ceil_share(p / 100.0, cands.len()));
                for &w in &s.negatives[u] {
                    prop_assert!(!g.has_edge(u, w));
                    prop_assert!(cands.contains(&w));
                    prop_assert!(!s.positives[u].contains(&w));
                }
            }
        }

        #[test]
        fn split_partitions_posts_and_links(
            counts in proptest::collection::vec(0usize..7, 1..6),
            frac in 0.05f64..=1.0,
            seed in any::<u64>(),
        ) {
            let n = counts.len();
            let edges: Vec<_> = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u && (u + v) % 2 == 0).map(move |v| (u, v))).collect();
            let ds = dataset(&counts, &edges);
            let s = split(&ds, frac, seed).unwrap();
            for u in 0..n {
                let mut both: Vec<_> = s.train.posts_of(u).to_vec();
                both.extend(s.test_posts.iter().filter(|p| p.author == u).cloned());
                let mut orig = ds.posts_of(u).to_vec();
                both.sort_by(|a, b| a.tokens.cmp(&b.tokens));
                orig.sort_by(|a, b| a.tokens.cmp(&b.tokens));
                prop_assert_eq!(both, orig);

                let mut links: Vec<_> = s.train.graph().followees(u).to_vec();
                for &v in &s.test_links[u] {
                    prop_assert!(!s.train.graph().has_edge(u, v));
                    links.push(v);
                }
                links.sort_unstable();
                prop_assert_eq!(links.as_slice(), ds.graph().followees(u));
                prop_assert_eq!(s.train.posts_of(u).len(), ceil_share(frac, ds.posts_of(u).len()));
            }
        }
    }
}
