//! `HATDATA v1`: a single plain-text bundle.
//!
//! ```text
//! HATDATA v1
//! users <N>
//! words <W>
//! edges <E>
//! posts <P>
//! [users]        N lines, one name each, index order
//! [words]        W lines, one word each, id order
//! [edges]        E lines `follower<TAB>followee` (ids)
//! [posts]        P lines `author<TAB>w w w` (ids)
//! ```

use std::fmt::Write;
use std::path::Path;

use super::{Dataset, FollowGraph, Post, Vocabulary};
use crate::text::{read_file, Lines};
use crate::{Error, Result};

pub const DATASET_MAGIC: &str = "HATDATA v1";

pub fn write_dataset(ds: &Dataset) -> String {
    let mut out = String::new();
    writeln!(out, "{DATASET_MAGIC}").unwrap();
    writeln!(out, "users {}", ds.n_users()).unwrap();
    writeln!(out, "words {}", ds.vocab().len()).unwrap();
    writeln!(out, "edges {}", ds.graph().n_edges()).unwrap();
    writeln!(out, "posts {}", ds.posts().len()).unwrap();
    out.push_str("[users]\n");
    for name in ds.users() {
        writeln!(out, "{name}").unwrap();
    }
    out.push_str("[words]\n");
    for w in ds.vocab().words() {
        writeln!(out, "{w}").unwrap();
    }
    out.push_str("[edges]\n");
    for (u, v) in ds.graph().edges() {
        writeln!(out, "{u}\t{v}").unwrap();
    }
    out.push_str("[posts]\n");
    for p in ds.posts() {
        write!(out, "{}\t", p.author).unwrap();
        for (i, w) in p.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{w}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(path, &read_file(path)?)
}

pub(crate) fn parse_dataset(path: &Path, content: &str) -> Result<Dataset> {
    let mut lines = Lines::new(path, content);
    lines.expect(DATASET_MAGIC)?;
    let n_users = lines.header("users")?;
    let n_words = lines.header("words")?;
    let n_edges = lines.header("edges")?;
    let n_posts = lines.header("posts")?;

    lines.expect("[users]")?;
    let users = (0..n_users).map(|_| lines.next_line().map(str::to_owned)).collect::<Result<Vec<_>>>()?;

    lines.expect("[words]")?;
    let words = (0..n_words).map(|_| lines.next_line().map(str::to_owned)).collect::<Result<Vec<_>>>()?;
    let vocab = Vocabulary::from_words(words).map_err(|e| lines.err(e.to_string()))?;

    let id = |lines: &Lines, s: &str, bound: usize| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(v) if v < bound => Ok(v),
            _ => Err(lines.err(format!("invalid id `{s}`"))),
        }
    };

    lines.expect("[edges]")?;
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let l = lines.next_line()?;
        let (a, b) = l.split_once('\t').ok_or_else(|| lines.err("expected `u<TAB>v`"))?;
        edges.push((id(&lines, a, n_users)?, id(&lines, b, n_users)?));
    }
    let graph = FollowGraph::from_edges(n_users, edges).map_err(|e| lines.err(e.to_string()))?;
    if graph.n_edges() != n_edges {
        return Err(lines.err("duplicate edges"));
    }

    lines.expect("[posts]")?;
    let mut posts = Vec::with_capacity(n_posts);
    for _ in 0..n_posts {
        let l = lines.next_line()?;
        let (a, toks) = l.split_once('\t').ok_or_else(|| lines.err("expected `author<TAB>tokens`"))?;
        let author = id(&lines, a, n_users)?;
        let tokens = toks.split(' ').map(|t| id(&lines, t, n_words).map(|w| w as u32)).collect::<Result<Vec<_>>>()?;
        posts.push(Post { author, tokens });
    }
    lines.finish()?;
    Dataset::new(users, graph, posts, vocab).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::parse(path, 0, m),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_dataset() -> impl Strategy<Value = Dataset> {
        (1usize..8, 1usize..6).prop_flat_map(|(n, w)| {
            let edges = proptest::collection::vec((0..n, 0..n), 0..20);
            let posts = proptest::collection::vec((0..n, proptest::collection::vec(0..w as u32, 1..6)), 0..15);
            (edges, posts).prop_map(move |(edges, posts)| {
                let users = (0..n).map(|u| format!("user_{u}")).collect();
                let vocab = Vocabulary::from_words((0..w).map(|i| format!("w{i}")).collect()).unwrap();
                let graph = FollowGraph::from_edges(n, edges.into_iter().filter(|(a, b)| a != b)).unwrap();
                let posts = posts.into_iter().map(|(author, tokens)| Post { author, tokens }).collect();
                Dataset::new(users, graph, posts, vocab).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip(ds in arb_dataset()) {
            let text = write_dataset(&ds);
            let back = parse_dataset(Path::new("mem"), &text).unwrap();
            prop_assert_eq!(&back, &ds);
            prop_assert_eq!(write_dataset(&back), text);
        }
    }

    #[test]
    fn rejects_wrong_magic_and_bad_ids() {
        let err = parse_dataset(Path::new("b.dat"), "HATDATA v2\n").unwrap_err();
        assert!(err.to_string().starts_with("b.dat:1:"));
        let bad = "HATDATA v1\nusers 1\nwords 1\nedges 0\nposts 1\n[users]\na\n[words]\nx\n[edges]\n[posts]\n0\t3\n";
        let err = parse_dataset(Path::new("b.dat"), bad).unwrap_err();
        assert!(err.to_string().starts_with("b.dat:12:"), "{err}");
    }
}
