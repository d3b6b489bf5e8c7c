//! Follow graph and post corpus: ingestion, indexing, splitting and
//! non-link sub-sampling.

mod format;
mod ingest;
mod sample;

use std::collections::HashMap;

pub use format::{read_dataset, write_dataset, DATASET_MAGIC};
pub use ingest::{ingest, parse_corpus, tokenize};
pub use sample::{split, subsample_pairs, two_hop_candidates, PairSample, TrainTestSplit};

use crate::{Error, Result};

/// Dense user index in `0..n_users`.
pub type UserId = usize;
/// Dense word index in `0..vocabulary.len()`.
pub type WordId = u32;

/// Bijection between word strings and word ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut vocab = Vocabulary::new();
        for w in words {
            if vocab.index.contains_key(&w) {
                return Err(Error::InvalidArgument(format!("duplicate word `{w}`")));
            }
            vocab.insert(&w);
        }
        Ok(vocab)
    }

    /// Returns the id of `word`, adding it if absent.
    pub fn insert(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as WordId;
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// A bag-of-words post.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub author: UserId,
    pub tokens: Vec<WordId>,
}

/// Directed follow graph without self-loops or duplicate edges.
///
/// `followees[u]` and `followers[v]` are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowGraph {
    followees: Vec<Vec<UserId>>,
    followers: Vec<Vec<UserId>>,
    n_edges: usize,
}

impl FollowGraph {
    pub fn empty(n_users: usize) -> Self {
        FollowGraph { followees: vec![Vec::new(); n_users], followers: vec![Vec::new(); n_users], n_edges: 0 }
    }

    /// Builds a graph from `(follower, followee)` pairs. Duplicates collapse;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(n_users: usize, edges: impl IntoIterator<Item = (UserId, UserId)>) -> Result<Self> {
        let mut g = FollowGraph::empty(n_users);
        for (u, v) in edges {
            if u >= n_users || v >= n_users {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) out of range for {n_users} users")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on user {u}")));
            }
            g.followees[u].push(v);
        }
        for list in &mut g.followees {
            list.sort_unstable();
            list.dedup();
        }
        for (u, list) in g.followees.iter().enumerate() {
            for &v in list {
                g.followers[v].push(u);
            }
        }
        g.n_edges = g.followees.iter().map(Vec::len).sum();
        Ok(g)
    }

    pub fn n_users(&self) -> usize {
        self.followees.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn followees(&self, u: UserId) -> &[UserId] {
        &self.followees[u]
    }

    pub fn followers(&self, v: UserId) -> &[UserId] {
        &self.followers[v]
    }

    pub fn has_edge(&self, u: UserId, v: UserId) -> bool {
        self.followees[u].binary_search(&v).is_ok()
    }

    /// Edges in `(follower, followee)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.followees.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }
}

/// Users, their follow graph, and their posts grouped by author.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    users: Vec<String>,
    graph: FollowGraph,
    posts: Vec<Post>,
    offsets: Vec<usize>,
    vocab: Vocabulary,
}

impl Dataset {
    /// Validates and assembles a dataset. Posts are stably regrouped by author.
    pub fn new(users: Vec<String>, graph: FollowGraph, mut posts: Vec<Post>, vocab: Vocabulary) -> Result<Self> {
        let n = users.len();
        if graph.n_users() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: graph.n_users() });
        }
        let mut seen = std::collections::HashSet::with_capacity(n);
        for name in &users {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate user name `{name}`")));
            }
        }
        for (i, p) in posts.iter().enumerate() {
            if p.author >= n {
                return Err(Error::InvalidArgument(format!("post {i} has unknown author {}", p.author)));
            }
            if p.tokens.is_empty() {
                return Err(Error::InvalidArgument(format!("post {i} is empty")));
            }
            if let Some(&w) = p.tokens.iter().find(|&&w| w as usize >= vocab.len()) {
                return Err(Error::InvalidArgument(format!("post {i} has word id {w} outside vocabulary")));
            }
        }
        posts.sort_by_key(|p| p.author);
        let mut offsets = vec![0; n + 1];
        for p in &posts {
            offsets[p.author + 1] += 1;
        }
        for u in 0..n {
            offsets[u + 1] += offsets[u];
        }
        Ok(Dataset { users, graph, posts, offsets, vocab })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn user_name(&self, u: UserId) -> &str {
        &self.users[u]
    }

    pub fn user_id(&self, name: &str) -> Option<UserId> {
        self.users.iter().position(|n| n == name)
    }

    pub fn graph(&self) -> &FollowGraph {
        &self.graph
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// All posts, grouped by ascending author.
    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn posts_of(&self, u: UserId) -> &[Post] {
        &self.posts[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Index range of `u`'s posts within [`Dataset::posts`].
    pub fn post_range(&self, u: UserId) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    pub fn n_tokens(&self) -> usize {
        self.posts.iter().map(|p| p.tokens.len()).sum()
    }

    pub fn stats(&self) -> DatasetStats {
        let n = self.n_users();
        let followers = (0..n).map(|u| self.graph.followers(u).len());
        let followings = (0..n).map(|u| self.graph.followees(u).len());
        let posts = (0..n).map(|u| self.posts_of(u).len());
        let div = |a: usize| if n == 0 { 0.0 } else { a as f64 / n as f64 };
        DatasetStats {
            users: n,
            links: self.graph.n_edges(),
            avg_links: div(self.graph.n_edges()),
            max_followers: followers.clone().max().unwrap_or(0),
            min_followers: followers.min().unwrap_or(0),
            max_followings: followings.clone().max().unwrap_or(0),
            min_followings: followings.min().unwrap_or(0),
            posts: self.posts.len(),
            max_posts: posts.clone().max().unwrap_or(0),
            min_posts: posts.min().unwrap_or(0),
            avg_posts: div(self.posts.len()),
            words: self.vocab.len(),
            tokens: self.n_tokens(),
        }
    }
}

/// Summary counts in the layout of a dataset statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub users: usize,
    pub links: usize,
    pub avg_links: f64,
    pub max_followers: usize,
    pub max_followings: usize,
    pub min_followers: usize,
    pub min_followings: usize,
    pub posts: usize,
    pub max_posts: usize,
    pub min_posts: usize,
    pub avg_posts: f64,
    pub words: usize,
    pub tokens: usize,
}

impl std::fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Total users\t{}", self.users)?;
        writeln!(f, "Total links\t{}", self.links)?;
        writeln!(f, "Avg links\t{:.2}", self.avg_links)?;
        writeln!(f, "Max followers\t{}", self.max_followers)?;
        writeln!(f, "Max followings\t{}", self.max_followings)?;
        writeln!(f, "Min followers\t{}", self.min_followers)?;
        writeln!(f, "Min followings\t{}", self.min_followings)?;
        writeln!(f, "Total posts\t{}", self.posts)?;
        writeln!(f, "Max posts\t{}", self.max_posts)?;
        writeln!(f, "Min posts\t{}", self.min_posts)?;
        writeln!(f, "Avg posts\t{:.2}", self.avg_posts)?;
        writeln!(f, "Unique words\t{}", self.words)?;
        write!(f, "Total tokens\t{}", self.tokens)
    }
}
