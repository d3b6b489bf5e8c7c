use std::collections::HashMap;
use std::path::Path;

use super::{Dataset, FollowGraph, Post, UserId, Vocabulary};
use crate::text::read_file;
use crate::{Error, Result};

/// Lowercases, drops URLs and @-mentions, and splits on non-alphanumeric
/// characters. Hashtags keep their text.
pub fn tokenize(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in raw.split_whitespace() {
        let lower = chunk.to_lowercase();
        if lower.starts_with('@')
            || lower.starts_with("http://")
            || lower.starts_with("https://")
            || lower.starts_with("www.")
        {
            continue;
        }
        out.extend(lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_owned));
    }
    out
}

/// Reads `follower<TAB>followee` and `user<TAB>text` files.
///
/// Words seen fewer than `min_word_count` times are removed, posts emptied by
/// that filter are dropped, and users left with neither posts nor edges are
/// dropped. Users are indexed in order of first appearance in the post file.
pub fn ingest(edge_file: &Path, post_file: &Path, min_word_count: usize) -> Result<Dataset> {
    let edges = read_file(edge_file)?;
    let posts = read_file(post_file)?;
    parse_corpus(edge_file, &edges, post_file, &posts, min_word_count)
}

/// [`ingest`] over in-memory contents; the paths only label errors.
pub fn parse_corpus(
    edge_path: &Path,
    edge_text: &str,
    post_path: &Path,
    post_text: &str,
    min_word_count: usize,
) -> Result<Dataset> {
    if min_word_count == 0 {
        return Err(Error::InvalidArgument("min_word_count must be at least 1".into()));
    }

    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, UserId> = HashMap::new();
    let mut raw_posts: Vec<(UserId, Vec<String>)> = Vec::new();
    for (i, line) in post_text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (user, text) =
            line.split_once('\t').ok_or_else(|| Error::parse(post_path, i + 1, "expected `user<TAB>text`"))?;
        let user = user.trim();
        if user.is_empty() {
            return Err(Error::parse(post_path, i + 1, "empty user name"));
        }
        let id = *ids.entry(user.to_owned()).or_insert_with(|| {
            names.push(user.to_owned());
            names.len() - 1
        });
        raw_posts.push((id, tokenize(text)));
    }

    let mut edges = Vec::new();
    for (i, line) in edge_text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t').map(str::trim);
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(edge_path, i + 1, "expected `follower<TAB>followee`"));
        };
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(edge_path, i + 1, "empty user name"));
        }
        let lookup = |name: &str| {
            ids.get(name).copied().ok_or_else(|| Error::UnknownUser {
                path: edge_path.to_path_buf(),
                line: i + 1,
                name: name.to_owned(),
            })
        };
        let (u, v) = (lookup(a)?, lookup(b)?);
        if u != v {
            edges.push((u, v));
        }
    }

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (_, toks) in &raw_posts {
        for t in toks {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut vocab = Vocabulary::new();
    let mut kept_posts: Vec<(UserId, Vec<u32>)> = Vec::new();
    for (author, toks) in &raw_posts {
        let tokens: Vec<u32> =
            toks.iter().filter(|t| counts[t.as_str()] >= min_word_count).map(|t| vocab.insert(t)).collect();
        if !tokens.is_empty() {
            kept_posts.push((*author, tokens));
        }
    }

    let mut active = vec![false; names.len()];
    for (a, _) in &kept_posts {
        active[*a] = true;
    }
    for &(u, v) in &edges {
        active[u] = true;
        active[v] = true;
    }
    let mut remap = vec![usize::MAX; names.len()];
    let mut users = Vec::new();
    for (old, name) in names.into_iter().enumerate() {
        if active[old] {
            remap[old] = users.len();
            users.push(name);
        }
    }

    let graph = FollowGraph::from_edges(users.len(), edges.into_iter().map(|(u, v)| (remap[u], remap[v])))?;
    let posts = kept_posts.into_iter().map(|(a, tokens)| Post { author: remap[a], tokens }).collect();
    Dataset::new(users, graph, posts, vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(edges: &str, posts: &str, min: usize) -> Result<Dataset> {
        parse_corpus(Path::new("edges.tsv"), edges, Path::new("posts.tsv"), posts, min)
    }

    #[test]
    fn tokenizer_strips_urls_and_mentions() {
        assert_eq!(
            tokenize("Lunch @bob at https://x.co/a #FoodPorn, so-good www.site.com"),
            vec!["lunch", "at", "foodporn", "so", "good"]
        );
        assert!(tokenize("  ").is_empty());
    }

    #[test]
    fn two_user_fixture() {
        let ds = parse("a\tb\n", "a\tx x\nb\tx y\n", 1).unwrap();
        assert_eq!(ds.n_users(), 2);
        assert_eq!(ds.vocab().len(), 2);
        assert_eq!(ds.graph().n_edges(), 1);
        assert!(ds.graph().has_edge(0, 1));
    }

    #[test]
    fn rare_words_are_filtered() {
        // "x" occurs 3 times, "y" once
        let ds = parse("a\tb\n", "a\tx x\nb\tx y\n", 3).unwrap();
        assert_eq!(ds.vocab().words(), &["x".to_string()]);
        let x = ds.vocab().id("x").unwrap();
        assert_eq!(ds.posts_of(1)[0].tokens, vec![x]);
    }

    #[test]
    fn empty_edge_file_is_valid() {
        let ds = parse("", "a\thello\nb\tworld\n", 1).unwrap();
        assert_eq!(ds.graph().n_edges(), 0);
        assert_eq!(ds.n_users(), 2);
    }

    #[test]
    fn inactive_users_are_dropped() {
        // c's only post is filtered away and c has no edges
        let ds = parse("a\tb\n", "a\tx x\nb\tx\nc\tzzz\n", 2).unwrap();
        assert_eq!(ds.users(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.posts().len(), 2);
        // a user with an edge but no surviving posts is kept
        let ds = parse("c\ta\n", "a\tx x\nc\tzzz\n", 2).unwrap();
        assert_eq!(ds.n_users(), 2);
        assert!(ds.posts_of(1).is_empty());
    }

    #[test]
    fn malformed_lines_name_file_and_line() {
        let err = parse("a\tb\nbroken\n", "a\tx\nb\ty\n", 1).unwrap_err();
        assert_eq!(err.to_string(), "edges.tsv:2: expected `follower<TAB>followee`");
        let err = parse("", "a\tx\nno tab here\n", 1).unwrap_err();
        assert!(err.to_string().starts_with("posts.tsv:2:"), "{err}");
    }

    #[test]
    fn unknown_edge_user_is_an_error() {
        let err = parse("a\tzed\n", "a\tx\n", 1).unwrap_err();
        assert!(matches!(err, Error::UnknownUser { line: 1, ref name, .. } if name == "zed"));
    }

    #[test]
    fn self_loops_and_duplicates_are_dropped() {
        let ds = parse("a\ta\na\tb\na\tb\n", "a\tx\nb\tx\n", 1).unwrap();
        assert_eq!(ds.graph().n_edges(), 1);
    }
}
