//! Text formats of the baseline models. Same layout as `HATMODEL v1`, each
//! with its own magic line.
//!
//! ```text
//! LDAMODEL v1        TWLDAMODEL v1       HITSMODEL v1
//! topics <K>         topics <K>          users <N>
//! users <N>          users <N>           iterations <I>
//! words <W>          words <W>           [hub]        N rows of 1 value
//! [tau]              pi <p>              [authority]  N rows of 1 value
//! [theta]            [tau]
//!                    [theta]
//!                    [background]        1 row of W values
//! ```

use std::fmt::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{HitsScores, LdaModel, TwitterLdaModel};
use crate::text::{read_file, write_matrix, write_row, Lines};
use crate::Result;

pub const LDA_MAGIC: &str = "LDAMODEL v1";
pub const TWITTER_LDA_MAGIC: &str = "TWLDAMODEL v1";
pub const HITS_MAGIC: &str = "HITSMODEL v1";

pub fn write_lda(m: &LdaModel) -> String {
    let mut out = String::new();
    writeln!(out, "{LDA_MAGIC}").unwrap();
    writeln!(out, "topics {}", m.tau.nrows()).unwrap();
    writeln!(out, "users {}", m.theta.nrows()).unwrap();
    writeln!(out, "words {}", m.tau.ncols()).unwrap();
    write_matrix(&mut out, "[tau]", &m.tau);
    write_matrix(&mut out, "[theta]", &m.theta);
    out
}

pub fn read_lda(path: &Path) -> Result<LdaModel> {
    parse_lda(path, &read_file(path)?)
}

pub(crate) fn parse_lda(path: &Path, content: &str) -> Result<LdaModel> {
    let mut lines = Lines::new(path, content);
    lines.expect(LDA_MAGIC)?;
    let k = lines.header("topics")?;
    let n = lines.header("users")?;
    let w = lines.header("words")?;
    let m = LdaModel { tau: lines.matrix("[tau]", k, w)?, theta: lines.matrix("[theta]", n, k)? };
    lines.finish()?;
    Ok(m)
}

pub fn write_twitter_lda(m: &TwitterLdaModel) -> String {
    let mut out = String::new();
    writeln!(out, "{TWITTER_LDA_MAGIC}").unwrap();
    writeln!(out, "topics {}", m.tau.nrows()).unwrap();
    writeln!(out, "users {}", m.theta.nrows()).unwrap();
    writeln!(out, "words {}", m.tau.ncols()).unwrap();
    writeln!(out, "pi {}", m.pi).unwrap();
    write_matrix(&mut out, "[tau]", &m.tau);
    write_matrix(&mut out, "[theta]", &m.theta);
    out.push_str("[background]\n");
    write_row(&mut out, m.background.iter().copied());
    out
}

pub fn read_twitter_lda(path: &Path) -> Result<TwitterLdaModel> {
    parse_twitter_lda(path, &read_file(path)?)
}

pub(crate) fn parse_twitter_lda(path: &Path, content: &str) -> Result<TwitterLdaModel> {
    let mut lines = Lines::new(path, content);
    lines.expect(TWITTER_LDA_MAGIC)?;
    let k = lines.header("topics")?;
    let n = lines.header("users")?;
    let w = lines.header("words")?;
    let pi = lines.real("pi")?;
    let tau = lines.matrix("[tau]", k, w)?;
    let theta = lines.matrix("[theta]", n, k)?;
    lines.expect("[background]")?;
    let background = Array1::from(lines.floats(w)?);
    lines.finish()?;
    Ok(TwitterLdaModel { theta, tau, background, pi })
}

pub fn write_hits(s: &HitsScores) -> String {
    let mut out = String::new();
    writeln!(out, "{HITS_MAGIC}").unwrap();
    writeln!(out, "users {}", s.hub.len()).unwrap();
    writeln!(out, "iterations {}", s.iterations).unwrap();
    let column = |v: &[f64]| Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("column");
    write_matrix(&mut out, "[hub]", &column(&s.hub));
    write_matrix(&mut out, "[authority]", &column(&s.authority));
    out
}

pub fn read_hits(path: &Path) -> Result<HitsScores> {
    parse_hits(path, &read_file(path)?)
}

pub(crate) fn parse_hits(path: &Path, content: &str) -> Result<HitsScores> {
    let mut lines = Lines::new(path, content);
    lines.expect(HITS_MAGIC)?;
    let n = lines.header("users")?;
    let iterations = lines.header("iterations")?;
    let hub = lines.matrix("[hub]", n, 1)?.into_raw_vec_and_offset().0;
    let authority = lines.matrix("[authority]", n, 1)?.into_raw_vec_and_offset().0;
    lines.finish()?;
    Ok(HitsScores { hub, authority, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::test_support::two_block_corpus;
    use crate::baselines::{fit_lda, fit_twitter_lda, hits, LdaConfig, PiPrior};
    use crate::corpus::FollowGraph;

    fn cfg() -> LdaConfig {
        LdaConfig { topics: 3, alpha: 0.5, gamma: 0.1, iters: 3, seed: 1 }
    }

    #[test]
    fn lda_round_trip() {
        let m = fit_lda(&two_block_corpus(1, 10), &cfg()).unwrap();
        let text = write_lda(&m);
        assert_eq!(parse_lda(Path::new("m"), &text).unwrap(), m);
    }

    #[test]
    fn twitter_lda_round_trip() {
        let m = fit_twitter_lda(&two_block_corpus(1, 10), &cfg(), PiPrior::default()).unwrap();
        let text = write_twitter_lda(&m);
        assert_eq!(parse_twitter_lda(Path::new("m"), &text).unwrap(), m);
    }

    #[test]
    fn hits_round_trip() {
        let g = FollowGraph::from_edges(4, [(0, 1), (2, 1), (1, 3)]).unwrap();
        let s = hits(&g, 100, 1e-12).unwrap();
        assert_eq!(parse_hits(Path::new("m"), &write_hits(&s)).unwrap(), s);
    }

    #[test]
    fn magic_lines_are_distinct() {
        let m = fit_lda(&two_block_corpus(1, 10), &cfg()).unwrap();
        let err = parse_twitter_lda(Path::new("m"), &write_lda(&m)).unwrap_err();
        assert!(err.to_string().starts_with("m:1:"), "{err}");
        assert!(parse_hits(Path::new("m"), &write_lda(&m)).is_err());
    }
}
